//! Truncations of the Fourier-space operators 𝒜, ℬ, 𝒞, 𝒥 and of the
//! multiplication operator M.
//!
//! 𝒜, ℬ, 𝒞 and 𝒥 act on positive modes and use 1-based row numbers n = 1..N
//! (row n is stored at 0-based index n - 1). The M-matrix acts on the full
//! exponential basis e^{inx}, |n| <= N, stored with mode n at index n + N.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tridiag::{Epsilon, Label, Scalar, TridiagonalMatrix};

fn check_order(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidOrder)
    } else {
        Ok(())
    }
}

fn int<T: Scalar>(v: usize) -> T {
    T::from_i64(v as i64)
}

fn half<T: Scalar>(v: T) -> T {
    // v / 2 without requiring Div on the scalar trait
    v * (T::one() / (T::one() + T::one()))
}

/// 𝒜_N: diagonal n, super-diagonal ε n(n+1)/2, sub-diagonal -ε n(n+1)/2.
pub fn build_a<T: Scalar>(n: usize, eps: &Epsilon<T>) -> Result<TridiagonalMatrix<T>> {
    check_order(n)?;
    let e = eps.value();
    let diag = (1..=n).map(int).collect();
    let upper: Vec<T> = (1..n)
        .map(|k| half(e.clone() * int(k * (k + 1))))
        .collect();
    let lower = upper.iter().map(|v| -v.clone()).collect();
    Ok(TridiagonalMatrix::new(diag, upper, lower, Label::A)?.with_epsilon(e))
}

/// ℬ_N: unit diagonal, (n, n+1) = ε n/2, (n+1, n) = -ε (n+1)/2.
pub fn build_b<T: Scalar>(n: usize, eps: &Epsilon<T>) -> Result<TridiagonalMatrix<T>> {
    check_order(n)?;
    let e = eps.value();
    let diag = vec![T::one(); n];
    let upper = (1..n).map(|k| half(e.clone() * int(k))).collect();
    let lower = (1..n).map(|k| -half(e.clone() * int(k + 1))).collect();
    Ok(TridiagonalMatrix::new(diag, upper, lower, Label::B)?.with_epsilon(e))
}

/// 𝒞_N = diag(1, ..., N).
pub fn build_c<T: Scalar>(n: usize) -> Result<TridiagonalMatrix<T>> {
    check_order(n)?;
    TridiagonalMatrix::new(
        (1..=n).map(int).collect(),
        vec![T::zero(); n - 1],
        vec![T::zero(); n - 1],
        Label::C,
    )
}

/// 𝒥_N = diag(-1, 1, -1, ...).
pub fn build_j<T: Scalar>(n: usize) -> Result<TridiagonalMatrix<T>> {
    check_order(n)?;
    TridiagonalMatrix::new(
        (1..=n)
            .map(|k| if k % 2 == 1 { -T::one() } else { T::one() })
            .collect(),
        vec![T::zero(); n - 1],
        vec![T::zero(); n - 1],
        Label::J,
    )
}

/// Matrix of M y = ε (sin x · y)' + y on span{e^{inx} : |n| <= N}.
///
/// Column n has 1 on the diagonal, ε(n+1)/2 in row n+1 and -ε(n-1)/2 in
/// row n-1, from (sin x e^{inx})' = ((n+1) e^{i(n+1)x} - (n-1) e^{i(n-1)x}) / 2.
pub fn build_m_matrix<T: Scalar>(n: usize, eps: &Epsilon<T>) -> Result<TridiagonalMatrix<T>> {
    let e = eps.value();
    let size = 2 * n + 1;
    let mode = |idx: usize| idx as i64 - n as i64;
    // lower[k] = entry (k+1, k): column mode m = mode(k) feeding row m+1.
    let lower = (0..size - 1)
        .map(|k| half(e.clone() * T::from_i64(mode(k) + 1)))
        .collect();
    // upper[k] = entry (k, k+1): column mode m = mode(k+1) feeding row m-1.
    let upper = (0..size - 1)
        .map(|k| -half(e.clone() * T::from_i64(mode(k + 1) - 1)))
        .collect();
    Ok(TridiagonalMatrix::new(vec![T::one(); size], upper, lower, Label::M)?.with_epsilon(e))
}

/// Largest entrywise |A - B C|, including the ±2 bands of the product.
pub fn factorization_residual<T: Scalar>(
    a: &TridiagonalMatrix<T>,
    b: &TridiagonalMatrix<T>,
    c: &TridiagonalMatrix<T>,
) -> Result<T> {
    if a.order() != b.order() || a.order() != c.order() {
        return Err(Error::DimensionMismatch(format!(
            "factorization check needs equal orders, got {}, {}, {}",
            a.order(),
            b.order(),
            c.order()
        )));
    }
    let [m2, m1, d, p1, p2] = b.product_bands(c)?;
    let mut worst = T::zero();
    let mut track = |x: T| {
        let x = x.abs();
        if x > worst {
            worst = x;
        }
    };
    m2.into_iter().chain(p2).for_each(&mut track);
    for (p, q) in d.into_iter().zip(&a.diag) {
        track(p - q.clone());
    }
    for (p, q) in p1.into_iter().zip(&a.upper) {
        track(p - q.clone());
    }
    for (p, q) in m1.into_iter().zip(&a.lower) {
        track(p - q.clone());
    }
    Ok(worst)
}

/// max |𝒜 - ℬ𝒞| at truncation N. Zero in exact arithmetic for every N.
pub fn check_factorization<T: Scalar>(n: usize, eps: &Epsilon<T>) -> Result<T> {
    factorization_residual(&build_a(n, eps)?, &build_b(n, eps)?, &build_c(n)?)
}

/// max |𝒥 Mᵀ 𝒥 - M| for a tridiagonal M and a diagonal signature 𝒥.
pub fn j_selfadjoint_residual<T: Scalar>(
    m: &TridiagonalMatrix<T>,
    j: &TridiagonalMatrix<T>,
) -> Result<T> {
    if m.order() != j.order() {
        return Err(Error::DimensionMismatch(format!(
            "operator of order {} with metric of order {}",
            m.order(),
            j.order()
        )));
    }
    let mt = m.transpose();
    let s = &j.diag;
    let conj = TridiagonalMatrix {
        label: m.label,
        epsilon: m.epsilon.clone(),
        diag: mt
            .diag
            .iter()
            .zip(s)
            .map(|(v, si)| si.clone() * v.clone() * si.clone())
            .collect(),
        upper: mt
            .upper
            .iter()
            .enumerate()
            .map(|(k, v)| s[k].clone() * v.clone() * s[k + 1].clone())
            .collect(),
        lower: mt
            .lower
            .iter()
            .enumerate()
            .map(|(k, v)| s[k + 1].clone() * v.clone() * s[k].clone())
            .collect(),
    };
    conj.max_abs_diff(m)
}

/// max |𝒥 𝒜ᵀ 𝒥 - 𝒜| at truncation N.
pub fn check_j_selfadjoint<T: Scalar>(n: usize, eps: &Epsilon<T>) -> Result<T> {
    j_selfadjoint_residual(&build_a(n, eps)?, &build_j(n)?)
}

/// Coefficients f_1..f_N of a sequence in the domain of 𝒜 (f_0 = 0).
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceVector {
    pub coeffs: Vec<Complex64>,
}

impl SequenceVector {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self { coeffs }
    }

    /// f_n for 1-based n; zero for n = 0 and beyond the stored length.
    pub fn get(&self, n: usize) -> Complex64 {
        if n == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs.get(n - 1).copied().unwrap_or_default()
        }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// Domain norm of 𝒜: { Σ n² (|f_n|² + |(n+1) f_{n+1} - (n-1) f_{n-1}|²) }^{1/2},
/// with the sum truncated at n = N and f_{N+1} = 0.
pub fn sequence_norm(f: &SequenceVector) -> f64 {
    (1..=f.len())
        .map(|n| {
            let nf = n as f64;
            let coupling = f.get(n + 1) * (nf + 1.0) - f.get(n - 1) * (nf - 1.0);
            nf * nf * (f.get(n).norm_sqr() + coupling.norm_sqr())
        })
        .sum::<f64>()
        .sqrt()
}
