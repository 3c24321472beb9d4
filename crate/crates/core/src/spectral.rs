//! Eigenvalues, singular values and Hilbert–Schmidt diagnostics of real
//! tridiagonal truncations.
//!
//! Eigenvalues come from implicit double-shift QR on the upper Hessenberg
//! form (a tridiagonal matrix already is one), with deflation on negligible
//! subdiagonals. The smallest singular value uses Lanczos on (TᵀT)⁻¹, whose
//! action costs two tridiagonal solves.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::banded::TridiagonalLu;
use crate::error::{Error, Result};
use crate::fourier::build_a;
use crate::tridiag::{Epsilon, TridiagonalMatrix};

#[derive(Debug, Clone, Copy)]
pub struct QrOptions {
    /// relative deflation threshold: |h_{k+1,k}| <= tol (|h_kk| + |h_{k+1,k+1}|)
    pub tol: f64,
    /// cap on the total number of double-shift sweeps
    pub max_sweeps: usize,
}

impl Default for QrOptions {
    fn default() -> Self {
        Self {
            tol: f64::EPSILON,
            max_sweeps: 0,
        }
    }
}

impl QrOptions {
    fn sweep_cap(&self, n: usize) -> usize {
        if self.max_sweeps == 0 {
            30 * n.max(1)
        } else {
            self.max_sweeps
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumResult {
    /// sorted by modulus, ties broken by imaginary part
    pub eigenvalues: Vec<Complex64>,
    pub order: usize,
    pub epsilon: Option<f64>,
    pub iterations: usize,
    /// max_k ‖T v_k - λ_k v_k‖ / ‖v_k‖, when eigenvectors were computed
    pub max_residual: Option<f64>,
}

pub fn sort_by_modulus(values: &mut [Complex64]) {
    values.sort_by(|a, b| {
        a.norm()
            .total_cmp(&b.norm())
            .then(a.re.total_cmp(&b.re))
            .then(a.im.total_cmp(&b.im))
    });
}

/// Eigenvalues of a real upper Hessenberg matrix (entries below the first
/// subdiagonal are ignored). Returns the eigenvalues and the sweep count.
pub fn hessenberg_eigenvalues(h: &DMatrix<f64>, opts: QrOptions) -> Result<(Vec<Complex64>, usize)> {
    let nn = h.nrows();
    if nn == 0 || h.ncols() != nn {
        return Err(Error::DimensionMismatch(format!(
            "eigenvalues need a nonempty square matrix, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    let mut h = h.clone();
    let mut wr = vec![0.0; nn];
    let mut wi = vec![0.0; nn];
    let cap = opts.sweep_cap(nn);
    let eps = opts.tol;

    let norm = (0..nn)
        .map(|i| (i.saturating_sub(1)..nn).map(|j| h[(i, j)].abs()).sum::<f64>())
        .sum::<f64>();

    let mut n = nn as isize - 1;
    let mut exshift = 0.0;
    let mut iter = 0usize;
    let mut sweeps = 0usize;
    let (mut p, mut q, mut r, mut s, mut z): (f64, f64, f64, f64, f64);
    let (mut x, mut y, mut w);

    while n >= 0 {
        let nu = n as usize;
        // find a negligible subdiagonal
        let mut l = nu;
        while l > 0 {
            s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
            if s == 0.0 {
                s = norm;
            }
            if h[(l, l - 1)].abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == nu {
            // one root
            wr[nu] = h[(nu, nu)] + exshift;
            wi[nu] = 0.0;
            n -= 1;
            iter = 0;
        } else if l + 1 == nu {
            // two roots from the trailing 2x2 block
            w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            p = (h[(nu - 1, nu - 1)] - h[(nu, nu)]) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            x = h[(nu, nu)] + exshift;
            if q >= 0.0 {
                z = if p >= 0.0 { p + z } else { p - z };
                wr[nu - 1] = x + z;
                wr[nu] = if z != 0.0 { x - w / z } else { x + z };
                wi[nu - 1] = 0.0;
                wi[nu] = 0.0;
            } else {
                wr[nu - 1] = x + p;
                wr[nu] = x + p;
                wi[nu - 1] = z;
                wi[nu] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            x = h[(nu, nu)];
            y = h[(nu - 1, nu - 1)];
            w = h[(nu, nu - 1)] * h[(nu - 1, nu)];

            // exceptional shifts
            if iter == 10 {
                exshift += x;
                for i in 0..=nu {
                    h[(i, i)] -= x;
                }
                s = h[(nu, nu - 1)].abs() + h[(nu - 1, nu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter == 30 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in 0..=nu {
                        h[(i, i)] -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }

            iter += 1;
            sweeps += 1;
            if sweeps > cap {
                return Err(Error::NoConvergence {
                    sweeps: cap,
                    deflated: nn - 1 - nu,
                    remaining: nu + 1,
                });
            }

            // look for two consecutive small subdiagonals
            let mut m = nu - 2;
            loop {
                z = h[(m, m)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[(m + 1, m)] + h[(m, m + 1)];
                q = h[(m + 1, m + 1)] - z - r - s;
                r = h[(m + 2, m + 1)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if h[(m, m - 1)].abs() * (q.abs() + r.abs())
                    < eps * (p.abs() * (h[(m - 1, m - 1)].abs() + z.abs() + h[(m + 1, m + 1)].abs()))
                {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nu {
                h[(i, i - 2)] = 0.0;
                if i > m + 2 {
                    h[(i, i - 3)] = 0.0;
                }
            }

            // double QR step on rows l..=n, columns m..=n
            for k in m..nu {
                let notlast = k != nu - 1;
                if k != m {
                    p = h[(k, k - 1)];
                    q = h[(k + 1, k - 1)];
                    r = if notlast { h[(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s != 0.0 {
                    if k != m {
                        h[(k, k - 1)] = -s * x;
                    } else if l != m {
                        h[(k, k - 1)] = -h[(k, k - 1)];
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;

                    for j in k..=nu {
                        p = h[(k, j)] + q * h[(k + 1, j)];
                        if notlast {
                            p += r * h[(k + 2, j)];
                            h[(k + 2, j)] -= p * z;
                        }
                        h[(k, j)] -= p * x;
                        h[(k + 1, j)] -= p * y;
                    }
                    for i in l..=nu.min(k + 3) {
                        p = x * h[(i, k)] + y * h[(i, k + 1)];
                        if notlast {
                            p += z * h[(i, k + 2)];
                            h[(i, k + 2)] -= p * r;
                        }
                        h[(i, k)] -= p;
                        h[(i, k + 1)] -= p * q;
                    }
                }
            }
        }
    }

    let values = wr.into_iter().zip(wi).map(|(re, im)| Complex64::new(re, im)).collect();
    Ok((values, sweeps))
}

/// All eigenvalues of a real tridiagonal matrix, sorted by modulus.
pub fn eigenvalues(t: &TridiagonalMatrix<f64>, opts: QrOptions) -> Result<SpectrumResult> {
    let (mut values, sweeps) = hessenberg_eigenvalues(&t.to_dense(), opts)?;
    sort_by_modulus(&mut values);
    Ok(SpectrumResult {
        eigenvalues: values,
        order: t.order(),
        epsilon: t.epsilon,
        iterations: sweeps,
        max_residual: None,
    })
}

/// Eigenvector for an approximate eigenvalue by inverse iteration on the
/// complex shifted tridiagonal matrix. Returned with unit 2-norm.
pub fn inverse_iteration(t: &TridiagonalMatrix<Complex64>, lambda: Complex64) -> Result<Vec<Complex64>> {
    let n = t.order();
    let scale = t
        .diag
        .iter()
        .chain(&t.upper)
        .chain(&t.lower)
        .map(|v| v.norm())
        .fold(0.0, f64::max)
        .max(1.0);
    // perturb the shift off the exact eigenvalue so the factorization exists
    let shift = lambda + Complex64::new(1.0, 1.0) * (scale * 64.0 * f64::EPSILON);
    let mut shifted = t.clone();
    shifted.diag.iter_mut().for_each(|d| *d -= shift);
    let lu = TridiagonalLu::factor(&shifted)?;
    let mut v: Vec<Complex64> = (0..n)
        .map(|k| Complex64::new(1.0 + (k % 7) as f64 / 7.0, 0.0))
        .collect();
    for _ in 0..3 {
        lu.solve_in_place(&mut v);
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::Singular);
        }
        v.iter_mut().for_each(|c| *c /= norm);
    }
    Ok(v)
}

/// Eigenvalues together with inverse-iteration eigenvectors; fills
/// `max_residual`.
pub fn eigenpairs(
    t: &TridiagonalMatrix<f64>,
    opts: QrOptions,
) -> Result<(SpectrumResult, Vec<Vec<Complex64>>)> {
    let mut spectrum = eigenvalues(t, opts)?;
    let tc = t.to_complex();
    let mut vectors = Vec::with_capacity(t.order());
    let mut worst: f64 = 0.0;
    for &lambda in &spectrum.eigenvalues {
        let v = inverse_iteration(&tc, lambda)?;
        let tv = tc.matvec(&v)?;
        let res = tv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - lambda * b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        worst = worst.max(res);
        vectors.push(v);
    }
    spectrum.max_residual = Some(worst);
    Ok((spectrum, vectors))
}

/// σ_min(T), the reciprocal square root of the largest eigenvalue of
/// (TᵀT)⁻¹, by Lanczos with full reorthogonalization.
pub fn smallest_singular_value(t: &TridiagonalMatrix<f64>) -> Result<f64> {
    let n = t.order();
    if n == 1 {
        let s = t.diag[0].abs();
        return if s == 0.0 { Err(Error::Singular) } else { Ok(s) };
    }
    let lu = TridiagonalLu::factor(t)?;
    let lu_t = TridiagonalLu::factor(&t.transpose())?;
    let apply = |v: &[f64]| {
        let z = lu_t.solve(v);
        lu.solve(&z)
    };

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut v: Vec<f64> = (0..n).map(|k| 1.0 + ((k * 7) % 11) as f64 / 11.0).collect();
    normalize(&mut v);
    let mut previous = f64::NAN;
    let mut theta = 0.0;

    for step in 0..n {
        let mut w = apply(&v);
        let alpha = dot(&w, &v);
        basis.push(v.clone());
        alphas.push(alpha);
        // full reorthogonalization, twice
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                w.iter_mut().zip(b).for_each(|(wi, bi)| *wi -= c * bi);
            }
        }
        let beta = dot(&w, &w).sqrt();

        let done = step + 1 == n || beta <= 1e-14 * alpha.abs();
        if done || step % 8 == 7 {
            let k = alphas.len();
            let tri = DMatrix::from_fn(k, k, |i, j| {
                if i == j {
                    alphas[i]
                } else if i + 1 == j {
                    betas[i]
                } else if j + 1 == i {
                    betas[j]
                } else {
                    0.0
                }
            });
            let eig = SymmetricEigen::new(tri);
            let (idx, &top) = eig
                .eigenvalues
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .expect("nonempty");
            theta = top;
            let ritz_residual = beta * eig.eigenvectors[(k - 1, idx)].abs();
            if done || ritz_residual <= 1e-13 * theta || (theta - previous).abs() <= 1e-15 * theta {
                break;
            }
            previous = theta;
        }
        betas.push(beta);
        v = w.into_iter().map(|x| x / beta).collect();
    }

    if !theta.is_finite() || theta <= 0.0 {
        return Err(Error::Singular);
    }
    let sigma = 1.0 / theta.sqrt();
    let scale = t.max_abs_entry().max(f64::MIN_POSITIVE);
    if sigma <= n as f64 * f64::EPSILON * scale {
        return Err(Error::Singular);
    }
    Ok(sigma)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let n = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

/// Frobenius norm of T⁻¹, one tridiagonal solve per unit vector. Blocks
/// separated by a pair of zero couplings are solved independently, so a
/// diagonal matrix costs O(N).
pub fn hs_norm_inverse(t: &TridiagonalMatrix<f64>) -> Result<f64> {
    let n = t.order();
    let mut total = 0.0;
    let mut start = 0;
    for end in 1..=n {
        let split = end == n || (t.upper[end - 1] == 0.0 && t.lower[end - 1] == 0.0);
        if !split {
            continue;
        }
        let block = TridiagonalMatrix::new(
            t.diag[start..end].to_vec(),
            t.upper[start..end - 1].to_vec(),
            t.lower[start..end - 1].to_vec(),
            t.label,
        )?;
        total += block_inverse_frobenius_sq(&block)?;
        start = end;
    }
    Ok(total.sqrt())
}

fn block_inverse_frobenius_sq(t: &TridiagonalMatrix<f64>) -> Result<f64> {
    let n = t.order();
    if n == 1 {
        if t.diag[0] == 0.0 {
            return Err(Error::Singular);
        }
        return Ok(1.0 / (t.diag[0] * t.diag[0]));
    }
    let lu = TridiagonalLu::factor(t)?;
    let mut col = vec![0.0; n];
    let mut acc = 0.0;
    for j in 0..n {
        col.iter_mut().for_each(|c| *c = 0.0);
        col[j] = 1.0;
        lu.solve_in_place(&mut col);
        acc += dot(&col, &col);
    }
    if !acc.is_finite() {
        return Err(Error::Singular);
    }
    Ok(acc)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub eigenvalues: Vec<Complex64>,
    /// |λ_k(N) - λ_k(previous N)|; empty for the first row
    pub differences: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub epsilon: f64,
    pub k: usize,
    /// an index is converged when its last difference is at most this
    pub tolerance: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// Converged flags from the last pair of truncations.
    pub fn converged(&self) -> Vec<bool> {
        match self.rows.last() {
            Some(row) if !row.differences.is_empty() => {
                row.differences.iter().map(|&d| d <= self.tolerance).collect()
            }
            _ => vec![false; self.k],
        }
    }

    pub fn nonconverged_indices(&self) -> Vec<usize> {
        self.converged()
            .iter()
            .enumerate()
            .filter_map(|(i, &c)| (!c).then_some(i))
            .collect()
    }

    /// Largest |Im λ| over converged eigenvalues of the last row.
    pub fn max_imag_converged(&self) -> Option<f64> {
        let last = self.rows.last()?;
        last.eigenvalues
            .iter()
            .zip(self.converged())
            .filter(|(_, c)| *c)
            .map(|(l, _)| l.im.abs())
            .reduce(f64::max)
    }

    pub fn last_differences(&self) -> &[f64] {
        self.rows.last().map(|r| r.differences.as_slice()).unwrap_or(&[])
    }
}

/// First k eigenvalues (by modulus) of 𝒜_N for each N in `ns`, with the
/// differences between successive truncations.
pub fn convergence_study(
    eps: Epsilon,
    ns: &[usize],
    k: usize,
    tolerance: f64,
    opts: QrOptions,
) -> Result<ConvergenceTable> {
    if ns.is_empty() || ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "truncation list must be nonempty and strictly increasing".into(),
        ));
    }
    if k == 0 || k > ns[0] {
        return Err(Error::InvalidArgument(format!(
            "k = {k} must lie in 1..={}",
            ns[0]
        )));
    }
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(ns.len());
    for &n in ns {
        let spectrum = eigenvalues(&build_a(n, &eps)?, opts)?;
        let head = spectrum.eigenvalues[..k].to_vec();
        let differences = rows
            .last()
            .map(|prev| {
                prev.eigenvalues
                    .iter()
                    .zip(&head)
                    .map(|(a, b)| (a - b).norm())
                    .collect()
            })
            .unwrap_or_default();
        rows.push(ConvergenceRow {
            n,
            eigenvalues: head,
            differences,
        });
    }
    Ok(ConvergenceTable {
        epsilon: eps.get(),
        k,
        tolerance,
        rows,
    })
}
