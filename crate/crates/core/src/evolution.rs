//! Truncated Galerkin dynamics of y_t + L y = 0 in the exponential basis.
//!
//! On modes −N..N the matrix G of L splits into three uncoupled sectors: the
//! zero mode (annihilated), the positive modes, where G = i·𝒜ᵀ, and the
//! negative modes, where G = −i·𝒜ᵀ after reflecting indices. The propagator
//! is exp(−tG).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expm::expm;
use crate::fourier::build_a;
use crate::spectral::{eigenpairs, eigenvalues, QrOptions};
use crate::trig::TrigPoly;
use crate::tridiag::{Epsilon, Label, TridiagonalMatrix};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Eigenvector condition numbers above this switch to scaling and squaring.
pub const CONDITION_LIMIT: f64 = 1e8;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GalerkinMatrix {
    pub n: usize,
    pub epsilon: f64,
    /// rows and columns indexed by mode + n
    pub matrix: TridiagonalMatrix<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sector {
    Negative,
    Zero,
    Positive,
}

impl GalerkinMatrix {
    pub fn new(n: usize, eps: Epsilon) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidOrder);
        }
        let e = eps.get();
        let modes: Vec<f64> = (-(n as i64)..=n as i64).map(|m| m as f64).collect();
        let diag = modes.iter().map(|&m| I * m).collect();
        // input mode m + 1 feeds mode m, input mode m feeds mode m + 1; both
        // couplings are ε m(m+1)/2, formed in the same order as in 𝒜
        let coupling: Vec<f64> = modes[..2 * n].iter().map(|&m| e * (m * (m + 1.0)) * 0.5).collect();
        let upper = coupling.iter().map(|&c| -I * c).collect();
        let lower = coupling.iter().map(|&c| I * c).collect();
        let matrix = TridiagonalMatrix::new(diag, upper, lower, Label::Galerkin)?.with_epsilon(Complex64::from(e));
        Ok(Self { n, epsilon: e, matrix })
    }

    pub fn order(&self) -> usize {
        2 * self.n + 1
    }

    pub fn index(&self, mode: i64) -> usize {
        (mode + self.n as i64) as usize
    }

    fn sector(&self, row: usize) -> Sector {
        match row.cmp(&self.n) {
            std::cmp::Ordering::Less => Sector::Negative,
            std::cmp::Ordering::Equal => Sector::Zero,
            std::cmp::Ordering::Greater => Sector::Positive,
        }
    }

    /// Largest entry coupling two different sectors; zero by construction.
    pub fn sector_coupling(&self) -> f64 {
        let m = &self.matrix;
        let mut worst: f64 = 0.0;
        for k in 0..self.order() - 1 {
            if self.sector(k) != self.sector(k + 1) {
                worst = worst.max(m.upper[k].norm()).max(m.lower[k].norm());
            }
        }
        worst.max(m.diag[self.n].norm())
    }

    /// Block on modes 1..N.
    pub fn positive_block(&self) -> TridiagonalMatrix<Complex64> {
        let n = self.n;
        let m = &self.matrix;
        TridiagonalMatrix::new(
            m.diag[n + 1..].to_vec(),
            m.upper[n + 1..].to_vec(),
            m.lower[n + 1..].to_vec(),
            Label::Galerkin,
        )
        .expect("bands of a valid matrix")
    }

    /// Block on modes −1..−N, row k holding mode −k.
    pub fn negative_block(&self) -> TridiagonalMatrix<Complex64> {
        let n = self.n;
        let m = &self.matrix;
        let diag = (1..=n).map(|k| m.diag[n - k]).collect();
        // entry (−k, −(k+1)) sits on the subdiagonal of the original ordering
        let upper = (1..n).map(|k| m.lower[n - k - 1]).collect();
        let lower = (1..n).map(|k| m.upper[n - k - 1]).collect();
        TridiagonalMatrix::new(diag, upper, lower, Label::Galerkin).expect("bands of a valid matrix")
    }

    /// max of |G₊ − i𝒜ᵀ| and |G₋ + i𝒜ᵀ|, entrywise.
    pub fn block_identity_residual(&self) -> Result<f64> {
        let at = build_a(self.n, &Epsilon::unchecked(self.epsilon))?.transpose().to_complex();
        let plus = at.map(|z| I * z);
        let minus = at.map(|z| -I * z);
        Ok(self
            .positive_block()
            .max_abs_diff(&plus)?
            .max(self.negative_block().max_abs_diff(&minus)?))
    }

    /// Eigenvalues of G, computed as i times those of the real matrix −iG.
    pub fn spectrum(&self, opts: QrOptions) -> Result<Vec<Complex64>> {
        let real = self.matrix.map(|z| (-I * z).re);
        let spec = eigenvalues(&real, opts)?;
        Ok(spec.eigenvalues.into_iter().map(|z| I * z).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Eigen,
    ScalingSquaring,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eigen" => Ok(Method::Eigen),
            "scaling_squaring" | "scaling-squaring" | "pade" => Ok(Method::ScalingSquaring),
            other => Err(Error::Parse(format!("unknown propagation method {other:?}"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Eigen => "eigen",
            Method::ScalingSquaring => "scaling_squaring",
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Propagation {
    pub state: TrigPoly,
    pub requested: Method,
    pub used: Method,
    /// set when the eigen path was abandoned
    pub fell_back: bool,
    /// eigenvector condition number, when the eigen path was attempted
    pub condition: Option<f64>,
}

/// Eigendecomposition 𝒜ᵀ = V Λ V⁻¹ with the condition number of V.
struct SectorEigen {
    values: Vec<Complex64>,
    vectors: DMatrix<Complex64>,
    condition: f64,
}

fn sector_eigen(n: usize, eps: Epsilon) -> Result<SectorEigen> {
    let at = build_a(n, &eps)?.transpose();
    let (spec, vecs) = eigenpairs(&at, QrOptions::default())?;
    let vectors = DMatrix::from_fn(n, n, |i, j| vecs[j][i]);
    let sv = vectors.clone().singular_values();
    let (smax, smin) = sv.iter().fold((0.0f64, f64::INFINITY), |(a, b), &s| (a.max(s), b.min(s)));
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    Ok(SectorEigen {
        values: spec.eigenvalues,
        vectors,
        condition,
    })
}

/// V exp(sign·i·t·Λ) V⁻¹ x.
fn apply_eigen(e: &SectorEigen, x: &[Complex64], t: f64, sign: f64) -> Option<Vec<Complex64>> {
    let coords = e.vectors.clone().lu().solve(&DVector::from_column_slice(x))?;
    let scaled = DVector::from_iterator(
        coords.len(),
        coords.iter().zip(&e.values).map(|(c, l)| c * (I * l * (sign * t)).exp()),
    );
    Some((&e.vectors * scaled).iter().copied().collect())
}

fn check_inputs(y0: &TrigPoly, t: f64, n: usize) -> Result<()> {
    if t.is_nan() || t < 0.0 || t.is_infinite() {
        return Err(Error::InvalidArgument(format!("time {t} must be finite and non-negative")));
    }
    if n == 0 {
        return Err(Error::InvalidOrder);
    }
    if y0.degree() > n && y0.trimmed().degree() > n {
        return Err(Error::InvalidArgument(format!(
            "initial degree {} exceeds truncation {n}",
            y0.trimmed().degree()
        )));
    }
    Ok(())
}

/// exp(−t G_N) y0.
pub fn propagate(y0: &TrigPoly, t: f64, n: usize, eps: Epsilon, method: Method) -> Result<Propagation> {
    check_inputs(y0, t, n)?;
    let y0 = y0.trimmed().padded(n);
    if method == Method::Eigen {
        match propagate_eigen(&y0, t, n, eps) {
            Ok((state, condition)) => {
                return Ok(Propagation {
                    state,
                    requested: method,
                    used: Method::Eigen,
                    fell_back: false,
                    condition: Some(condition),
                })
            }
            Err(Error::EigendecompositionIllConditioned { condition, .. }) => {
                let state = propagate_pade(&y0, t, n, eps)?;
                return Ok(Propagation {
                    state,
                    requested: method,
                    used: Method::ScalingSquaring,
                    fell_back: true,
                    condition: Some(condition),
                });
            }
            Err(Error::NoConvergence { .. } | Error::Singular) => {
                let state = propagate_pade(&y0, t, n, eps)?;
                return Ok(Propagation {
                    state,
                    requested: method,
                    used: Method::ScalingSquaring,
                    fell_back: true,
                    condition: None,
                });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Propagation {
        state: propagate_pade(&y0, t, n, eps)?,
        requested: method,
        used: Method::ScalingSquaring,
        fell_back: false,
        condition: None,
    })
}

/// Eigen path; fails with EigendecompositionIllConditioned above the limit.
pub fn propagate_eigen(y0: &TrigPoly, t: f64, n: usize, eps: Epsilon) -> Result<(TrigPoly, f64)> {
    check_inputs(y0, t, n)?;
    let y0 = y0.trimmed().padded(n);
    let e = sector_eigen(n, eps)?;
    if e.condition.is_nan() || e.condition > CONDITION_LIMIT {
        return Err(Error::EigendecompositionIllConditioned {
            condition: e.condition,
            limit: CONDITION_LIMIT,
        });
    }
    let pos: Vec<Complex64> = (1..=n as i64).map(|k| y0.coeff(k)).collect();
    let neg: Vec<Complex64> = (1..=n as i64).map(|k| y0.coeff(-k)).collect();
    // positive sector: exp(−i t 𝒜ᵀ); negative sector: exp(+i t 𝒜ᵀ)
    let p = apply_eigen(&e, &pos, t, -1.0).ok_or(Error::Singular)?;
    let q = apply_eigen(&e, &neg, t, 1.0).ok_or(Error::Singular)?;
    let mut modes = vec![(0, y0.coeff(0))];
    for k in 0..n {
        modes.push((k as i64 + 1, p[k]));
        modes.push((-(k as i64) - 1, q[k]));
    }
    Ok((TrigPoly::from_modes(&modes).padded(n), e.condition))
}

/// Dense exp(−t G_N) on all 2N + 1 modes.
pub fn propagator(t: f64, n: usize, eps: Epsilon) -> Result<DMatrix<Complex64>> {
    let g = GalerkinMatrix::new(n, eps)?;
    Ok(expm(&(g.matrix.to_dense() * Complex64::from(-t))))
}

fn propagate_pade(y0: &TrigPoly, t: f64, n: usize, eps: Epsilon) -> Result<TrigPoly> {
    let p = propagator(t, n, eps)?;
    let x = DVector::from_column_slice(y0.coeffs());
    let y = p * x;
    TrigPoly::from_coeffs(y.iter().copied().collect())
        .ok_or_else(|| Error::DimensionMismatch("propagated state".into()))
}

/// Largest singular value of exp(−t G_N) on zero-mean states; +∞ on overflow.
///
/// The two nonzero sectors are complex conjugates of each other, so the
/// positive sector alone determines the value.
pub fn transient_growth(t: f64, n: usize, eps: Epsilon) -> Result<f64> {
    if t.is_nan() || t < 0.0 || t.is_infinite() {
        return Err(Error::InvalidArgument(format!("time {t} must be finite and non-negative")));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    let a = build_a(n, &eps)?;
    let at = a.transpose().to_complex().to_dense();
    let p = expm(&(at * Complex64::new(0.0, -t)));
    if p.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Ok(f64::INFINITY);
    }
    let s = p.singular_values().max();
    Ok(if s.is_finite() { s } else { f64::INFINITY })
}

/// Trajectory of one initial condition sampled at increasing times.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvolutionTrace {
    pub n: usize,
    pub epsilon: f64,
    pub method: Method,
    pub times: Vec<f64>,
    pub states: Vec<TrigPoly>,
    pub norms: Vec<f64>,
    pub growth: Vec<f64>,
    pub fell_back: Vec<bool>,
}

impl EvolutionTrace {
    /// Propagates `y0` to every time; 0 is prepended when absent.
    pub fn compute(y0: &TrigPoly, times: &[f64], n: usize, eps: Epsilon, method: Method) -> Result<Self> {
        let mut ts = times.to_vec();
        if ts.first() != Some(&0.0) {
            ts.insert(0, 0.0);
        }
        if ts.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
            return Err(Error::InvalidArgument("times must be strictly increasing and non-negative".into()));
        }
        check_inputs(y0, 0.0, n)?;
        let mut trace = Self {
            n,
            epsilon: eps.get(),
            method,
            times: ts.clone(),
            states: Vec::new(),
            norms: Vec::new(),
            growth: Vec::new(),
            fell_back: Vec::new(),
        };
        for &t in &ts {
            let prop = if t == 0.0 {
                Propagation {
                    state: y0.trimmed().padded(n),
                    requested: method,
                    used: method,
                    fell_back: false,
                    condition: None,
                }
            } else {
                propagate(y0, t, n, eps, method)?
            };
            trace.norms.push(prop.state.norm());
            trace.states.push(prop.state);
            trace.fell_back.push(prop.fell_back);
            trace.growth.push(transient_growth(t, n, eps)?);
        }
        Ok(trace)
    }
}
