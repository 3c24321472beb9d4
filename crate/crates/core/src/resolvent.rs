//! Explicit resolvent of L by singular-weight panel quadrature.
//!
//! With w = sin x · y', the equation L y = φ reads ε w' + w / sin x = φ. On
//! (0, π) its solution vanishing at 0 is
//!
//!   w(x) = (1/ε) ∫₀ˣ (tan(t/2) / tan(x/2))^{1/ε} φ(t) dt,
//!
//! and the negative half follows from the same formula applied to φ(−s).
//! The weight ratio is never formed directly: panels are swept left to
//! right carrying w, and the singular factors at 0 and π are integrated
//! exactly on the end panels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

use crate::quadrature::{Panel, PanelRule, QuadratureGrid};
use crate::tridiag::Epsilon;
use crate::trig::TrigPoly;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolventOptions {
    /// φ counts as zero-mean when |c₀| ≤ mean_tolerance · rms(φ)
    pub mean_tolerance: f64,
    /// bound on the rms grid residual of ε (sin x y')' + y' − φ
    pub residual_tolerance: f64,
}

impl Default for ResolventOptions {
    fn default() -> Self {
        Self {
            mean_tolerance: 1e-10,
            residual_tolerance: 1e-6,
        }
    }
}

/// y sampled on the grid nodes together with a posteriori diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampledSolution {
    pub epsilon: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub dy: Vec<f64>,
    /// rms over (−π, π) of L y − φ at the nodes
    pub residual_rms: f64,
    pub residual_max: f64,
    /// |y(π⁻) − y(−π⁺)|, equal to |∫ y'|
    pub periodicity_gap: f64,
}

impl SampledSolution {
    /// Max nodal deviation from a reference function.
    pub fn max_error(&self, exact: impl Fn(f64) -> f64) -> f64 {
        self.x
            .iter()
            .zip(&self.y)
            .map(|(&x, &y)| (y - exact(x)).abs())
            .fold(0.0, f64::max)
    }
}

struct HalfSolution {
    /// y(s) − y(0)
    y: Vec<f64>,
    dy: Vec<f64>,
    residual: Vec<f64>,
    /// ∫₀^π y'
    total: f64,
}

/// Monomial coefficients in ρ of the interpolant through (ρ_j, h_j).
fn monomial_fit(rho: &[f64], h: &[f64]) -> Vec<f64> {
    let p = rho.len();
    let v = DMatrix::from_fn(p, p, |j, k| rho[j].powi(k as i32));
    v.lu()
        .solve(&DVector::from_column_slice(h))
        .map(|c| c.iter().copied().collect())
        .unwrap_or_else(|| vec![0.0; p])
}

/// ρ^{k+1} (ρ^{-β} − 1) / β, continuous at β = 0.
fn power_moment(rho: f64, k: usize, beta: f64) -> f64 {
    let lr = rho.ln();
    let tail = if beta.abs() < 1e-300 { -lr } else { (-beta * lr).exp_m1() / beta };
    rho.powi(k as i32 + 1) * tail
}

/// Solves ε w' + w / sin s = f on (0, π) with w(0) = 0, then integrates
/// y' = w / sin s from 0.
///
/// Interior panels carry w from their left end and integrate the scaled
/// weight (tan(t/2) / tan(s_max/2))^{1/ε} f with the panel rule. The two end
/// panels factor the weight as a power of the distance to the endpoint times
/// a smooth function, and integrate the power exactly against a polynomial
/// fit of the rest.
fn solve_half(f: impl Fn(f64) -> f64, eps: f64, panels: &[Panel], rule: &PanelRule) -> HalfSolution {
    let p = rule.len();
    let alpha = 1.0 / eps;
    let mut out = HalfSolution {
        y: Vec::new(),
        dy: Vec::new(),
        residual: Vec::new(),
        total: 0.0,
    };
    let mut w_left = 0.0;
    let mut y_left = 0.0;
    for panel in panels {
        let geo = panel.nodes(&rule.nodes);
        let h = geo.half_width;
        let fs: Vec<f64> = geo.s.iter().map(|&t| f(t)).collect();
        let ell_a = panel.ell_left();
        let carry = |ell_x: f64| {
            if ell_a.is_finite() {
                (alpha * (ell_a - ell_x)).exp() * w_left
            } else {
                0.0
            }
        };

        let at_zero = !panel.from_pi && panel.lo == 0.0;
        let at_pi = panel.from_pi && panel.lo == 0.0;
        let (w, w_right): (Vec<f64>, f64) = if at_zero {
            // tan(t/2)^α = (t/2)^α k(t) with k smooth
            let width = panel.hi;
            let k = |t: f64| ((t / 2.0).tan() / (t / 2.0)).powf(alpha);
            let rho: Vec<f64> = geo.r.iter().map(|r| r / width).collect();
            let hv: Vec<f64> = geo.r.iter().zip(&fs).map(|(&t, fv)| k(t) * fv).collect();
            let c = monomial_fit(&rho, &hv);
            let sum = |r: f64| -> f64 {
                c.iter()
                    .enumerate()
                    .map(|(i, ci)| ci * r.powi(i as i32 + 1) / (i as f64 + 1.0 + alpha))
                    .sum()
            };
            let w = (0..p).map(|j| width * sum(rho[j]) / (eps * k(geo.r[j]))).collect();
            (w, width * sum(1.0) / (eps * k(width)))
        } else if at_pi {
            // tan(t/2)^α = (r/2)^{-α} q(r) with r = π − t and q smooth
            let width = panel.hi;
            let q = |r: f64| ((r / 2.0) / (r / 2.0).tan()).powf(alpha);
            let rho: Vec<f64> = geo.r.iter().map(|r| r / width).collect();
            let hv: Vec<f64> = geo.r.iter().zip(&fs).map(|(&r, fv)| q(r) * fv).collect();
            let c = monomial_fit(&rho, &hv);
            let w = (0..p)
                .map(|j| {
                    let m: f64 = c
                        .iter()
                        .enumerate()
                        .map(|(i, ci)| ci * power_moment(rho[j], i, i as f64 + 1.0 - alpha))
                        .sum();
                    carry(geo.ell[j]) + width * m / (eps * q(geo.r[j]))
                })
                .collect();
            (w, 0.0)
        } else {
            // reference at the largest node keeps every exponential ≤ 1 in g
            let ell_ref = geo.ell[p - 1];
            let g: Vec<f64> = geo.ell.iter().zip(&fs).map(|(l, fv)| (alpha * (l - ell_ref)).exp() * fv).collect();
            let w = (0..p)
                .map(|j| {
                    let integral: f64 = rule.integration[j].iter().zip(&g).map(|(m, gk)| m * gk).sum();
                    carry(geo.ell[j]) + (alpha * (ell_ref - geo.ell[j])).exp() * h * integral / eps
                })
                .collect();
            let ell_b = panel.ell_right();
            let full: f64 = rule.weights.iter().zip(&g).map(|(wk, gk)| wk * gk).sum();
            (w, carry(ell_b) + (alpha * (ell_ref - ell_b)).exp() * h * full / eps)
        };

        let u: Vec<f64> = w.iter().zip(&geo.sin).map(|(wj, sj)| wj / sj).collect();
        for j in 0..p {
            let dw: f64 = rule.differentiation[j].iter().zip(&w).map(|(m, wk)| m * wk).sum::<f64>() / h;
            out.residual.push(eps * dw + u[j] - fs[j]);
            let iu: f64 = rule.integration[j].iter().zip(&u).map(|(m, uk)| m * uk).sum();
            out.y.push(y_left + h * iu);
        }
        out.dy.extend_from_slice(&u);
        y_left += h * rule.weights.iter().zip(&u).map(|(wk, uk)| wk * uk).sum::<f64>();
        w_left = w_right;
    }
    out.total = y_left;
    out
}

/// Zero-mean solution of L y = φ sampled on `grid`.
pub fn solve_l(phi: &TrigPoly, eps: Epsilon, grid: &QuadratureGrid, opts: &ResolventOptions) -> Result<SampledSolution> {
    let e = eps.get();
    if (grid.epsilon - e).abs() > 0.0 {
        return Err(Error::InvalidArgument(format!(
            "grid built for epsilon {} but solving at {}",
            grid.epsilon, e
        )));
    }
    let scale = phi.max_abs_coeff();
    if phi.reality_defect() > 1e-12 * scale.max(1.0) {
        return Err(Error::InvalidArgument("right-hand side must be real-valued".into()));
    }
    let rms = phi.norm() / (2.0 * std::f64::consts::PI).sqrt();
    let mean = phi.mean().norm();
    if mean > opts.mean_tolerance * rms {
        return Err(Error::Unsolvable { mean });
    }
    // drop the tolerated mean so the discrete problem is exactly solvable
    let phi = phi - &TrigPoly::constant(phi.mean().re);

    let rule = PanelRule::new(grid.config.nodes_per_panel);
    let panels = &grid.half_panels;
    let pos = solve_half(|s| phi.eval_real(s), e, panels, &rule);
    let neg = solve_half(|s| phi.eval_real(-s), e, panels, &rule);

    // x ascending: negative half reversed, then positive half; y(−s) = y(0) − Y_ψ(s)
    let y: Vec<f64> = neg.y.iter().rev().map(|v| -v).chain(pos.y.iter().copied()).collect();
    let dy: Vec<f64> = neg.dy.iter().rev().chain(pos.dy.iter()).copied().collect();
    let residual: Vec<f64> = neg.residual.iter().rev().chain(pos.residual.iter()).copied().collect();

    let mean_y = grid.integrate(&y) / (2.0 * std::f64::consts::PI);
    let y: Vec<f64> = y.iter().map(|v| v - mean_y).collect();
    let sq: Vec<f64> = residual.iter().map(|r| r * r).collect();
    let residual_rms = (grid.integrate(&sq) / (2.0 * std::f64::consts::PI)).sqrt();
    let residual_max = residual.iter().fold(0.0f64, |m, r| m.max(r.abs()));

    let tolerance = opts.residual_tolerance * rms.max(1.0);
    if residual_rms.is_nan() || residual_rms > tolerance {
        return Err(Error::QuadratureFailure {
            residual: residual_rms,
            tolerance,
        });
    }
    Ok(SampledSolution {
        epsilon: e,
        x: grid.nodes.clone(),
        y,
        dy,
        residual_rms,
        residual_max,
        periodicity_gap: (pos.total + neg.total).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physical::apply_l;
    use crate::quadrature::GridConfig;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(e: f64) -> (Epsilon, QuadratureGrid) {
        let eps = Epsilon::new(e).unwrap();
        (eps, QuadratureGrid::new(GridConfig::default(), e).unwrap())
    }

    #[test]
    fn zero_maps_to_zero() {
        let (eps, grid) = setup(0.5);
        let sol = solve_l(&TrigPoly::zero(3), eps, &grid, &ResolventOptions::default()).unwrap();
        assert!(sol.y.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn recovers_cos_x() {
        for e in [0.3, 0.5, 1.0, 1.5, 1.9] {
            let (eps, grid) = setup(e);
            let phi = apply_l(&TrigPoly::cos(1), eps);
            let sol = solve_l(&phi, eps, &grid, &ResolventOptions::default()).unwrap();
            let err = sol.max_error(f64::cos);
            assert!(err < 1e-6, "eps={e} err={err}");
            assert!(sol.residual_rms < 1e-6);
            assert!(sol.periodicity_gap < 1e-8, "gap {}", sol.periodicity_gap);
            let derr = sol.x.iter().zip(&sol.dy).map(|(x, d)| (d + x.sin()).abs()).fold(0.0, f64::max);
            assert!(derr < 1e-6, "eps={e} derr={derr}");
        }
    }

    #[test]
    fn constant_is_unsolvable() {
        let (eps, grid) = setup(1.0);
        let r = solve_l(&TrigPoly::constant(1.0), eps, &grid, &ResolventOptions::default());
        assert!(matches!(r, Err(Error::Unsolvable { .. })));
    }

    #[test]
    fn random_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for e in [0.5, 1.0] {
            let (eps, grid) = setup(e);
            for _ in 0..5 {
                let y = TrigPoly::random(&mut rng, 10, true, true);
                let sol = solve_l(&apply_l(&y, eps), eps, &grid, &ResolventOptions::default()).unwrap();
                let err = sol.max_error(|x| y.eval_real(x));
                assert!(err < 1e-5, "eps={e} err={err}");
            }
        }
    }

    #[test]
    fn refined_grid_handles_small_epsilon() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for e in [0.05, 0.2] {
            let eps = Epsilon::new(e).unwrap();
            let grid = QuadratureGrid::new(GridConfig::for_epsilon(e), e).unwrap();
            let y = TrigPoly::random(&mut rng, 6, true, true);
            let sol = solve_l(&apply_l(&y, eps), eps, &grid, &ResolventOptions::default()).unwrap();
            assert!(sol.max_error(|x| y.eval_real(x)) < 1e-8);
        }
    }

    #[test]
    fn mismatched_grid_is_rejected() {
        let (eps, _) = setup(1.0);
        let (_, grid) = setup(0.5);
        let r = solve_l(&TrigPoly::sin(1), eps, &grid, &ResolventOptions::default());
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn complex_input_is_rejected() {
        let (eps, grid) = setup(1.0);
        let r = solve_l(&TrigPoly::exp(1), eps, &grid, &ResolventOptions::default());
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
    }
}
