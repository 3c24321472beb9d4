//! Trigonometric polynomials Σ_{|n| <= N} c_n e^{inx} on (-π, π).
//!
//! Every physical-space operator in this crate maps trigonometric polynomials
//! to trigonometric polynomials, so all identities are checked on exact
//! coefficient algebra. Inner products use the unnormalized L² pairing on
//! (-π, π): ‖e^{inx}‖² = 2π.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigPoly {
    degree: usize,
    /// c_n stored at index n + degree.
    coeffs: Vec<Complex64>,
}

impl TrigPoly {
    pub fn zero(degree: usize) -> Self {
        Self {
            degree,
            coeffs: vec![ZERO; 2 * degree + 1],
        }
    }

    /// Builds from coefficients c_{-N}..c_N; the length must be odd.
    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Option<Self> {
        if coeffs.len().is_multiple_of(2) {
            return None;
        }
        let degree = coeffs.len() / 2;
        Some(Self { degree, coeffs })
    }

    pub fn from_modes(modes: &[(i64, Complex64)]) -> Self {
        let degree = modes.iter().map(|(n, _)| n.unsigned_abs() as usize).max().unwrap_or(0);
        let mut p = Self::zero(degree);
        for &(n, c) in modes {
            *p.coeff_mut(n) += c;
        }
        p
    }

    pub fn constant(c: f64) -> Self {
        Self::from_modes(&[(0, Complex64::new(c, 0.0))])
    }

    pub fn exp(k: i64) -> Self {
        Self::from_modes(&[(k, Complex64::new(1.0, 0.0))])
    }

    /// cos(kx) for k >= 0.
    pub fn cos(k: i64) -> Self {
        if k == 0 {
            return Self::constant(1.0);
        }
        let h = Complex64::new(0.5, 0.0);
        Self::from_modes(&[(k, h), (-k, h)])
    }

    /// sin(kx) for k >= 0.
    pub fn sin(k: i64) -> Self {
        if k == 0 {
            return Self::zero(0);
        }
        let h = Complex64::new(0.0, -0.5);
        Self::from_modes(&[(k, h), (-k, -h)])
    }

    /// Random polynomial with c_n uniform on the unit disk for 1 <= |n| <= degree.
    /// `real` conjugate-symmetrizes; `zero_mean` leaves c_0 = 0, otherwise
    /// c_0 is drawn from the disk as well (real part only when `real`).
    pub fn random<R: Rng + ?Sized>(rng: &mut R, degree: usize, real: bool, zero_mean: bool) -> Self {
        let mut disk = || {
            let r = rng.random::<f64>().sqrt();
            let theta = 2.0 * PI * rng.random::<f64>();
            Complex64::from_polar(r, theta)
        };
        let mut p = Self::zero(degree);
        if !zero_mean {
            let c = disk();
            *p.coeff_mut(0) = if real { Complex64::new(c.re, 0.0) } else { c };
        }
        for n in 1..=degree as i64 {
            let c = disk();
            *p.coeff_mut(n) = c;
            *p.coeff_mut(-n) = if real { c.conj() } else { disk() };
        }
        p
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Iterator over (n, c_n) for n = -N..=N.
    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let d = self.degree as i64;
        self.coeffs.iter().enumerate().map(move |(k, &c)| (k as i64 - d, c))
    }

    /// c_n, zero outside the stored degree.
    pub fn coeff(&self, n: i64) -> Complex64 {
        if n.unsigned_abs() as usize > self.degree {
            ZERO
        } else {
            self.coeffs[(n + self.degree as i64) as usize]
        }
    }

    fn coeff_mut(&mut self, n: i64) -> &mut Complex64 {
        let idx = (n + self.degree as i64) as usize;
        &mut self.coeffs[idx]
    }

    /// Same polynomial stored at a degree of at least `degree`.
    pub fn padded(&self, degree: usize) -> Self {
        let degree = degree.max(self.degree);
        let mut p = Self::zero(degree);
        for (n, c) in self.modes() {
            *p.coeff_mut(n) = c;
        }
        p
    }

    /// Drops trailing modes whose coefficients are exactly zero.
    pub fn trimmed(&self) -> Self {
        let mut d = self.degree as i64;
        while d > 0 && self.coeff(d) == ZERO && self.coeff(-d) == ZERO {
            d -= 1;
        }
        let mut p = Self::zero(d as usize);
        for n in -d..=d {
            *p.coeff_mut(n) = self.coeff(n);
        }
        p
    }

    /// Keeps only the modes |n| <= degree.
    pub fn truncated(&self, degree: usize) -> Self {
        let mut p = Self::zero(degree);
        for n in -(degree as i64)..=degree as i64 {
            *p.coeff_mut(n) = self.coeff(n);
        }
        p
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.modes().map(|(n, c)| c * Complex64::from_polar(1.0, n as f64 * x)).sum()
    }

    /// Value at x assuming the polynomial is real-valued.
    pub fn eval_real(&self, x: f64) -> f64 {
        self.eval(x).re
    }

    pub fn derivative(&self) -> Self {
        let mut p = self.clone();
        for (k, c) in p.coeffs.iter_mut().enumerate() {
            let n = k as f64 - self.degree as f64;
            *c *= I * n;
        }
        p
    }

    /// sin x · p, of degree N + 1: sin x e^{inx} = (e^{i(n+1)x} - e^{i(n-1)x}) / 2i.
    pub fn mul_sin(&self) -> Self {
        let mut p = Self::zero(self.degree + 1);
        let half_inv_i = Complex64::new(0.0, -0.5);
        for (n, c) in self.modes() {
            *p.coeff_mut(n + 1) += c * half_inv_i;
            *p.coeff_mut(n - 1) -= c * half_inv_i;
        }
        p
    }

    /// cos x · p, of degree N + 1.
    pub fn mul_cos(&self) -> Self {
        let mut p = Self::zero(self.degree + 1);
        for (n, c) in self.modes() {
            *p.coeff_mut(n + 1) += c * 0.5;
            *p.coeff_mut(n - 1) += c * 0.5;
        }
        p
    }

    pub fn conj_reflect(&self) -> Self {
        let mut p = Self::zero(self.degree);
        for (n, c) in self.modes() {
            *p.coeff_mut(-n) = c.conj();
        }
        p
    }

    /// ∫_{-π}^{π} p(x) \overline{q(x)} dx = 2π Σ c_n conj(d_n).
    pub fn inner(&self, other: &Self) -> Complex64 {
        let d = self.degree.min(other.degree) as i64;
        (-d..=d).map(|n| self.coeff(n) * other.coeff(n).conj()).sum::<Complex64>() * (2.0 * PI)
    }

    pub fn norm(&self) -> f64 {
        (2.0 * PI * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// Average value (1/2π) ∫ p = c_0.
    pub fn mean(&self) -> Complex64 {
        self.coeff(0)
    }

    /// ∫_a^b p(x) dx, exactly.
    pub fn integrate(&self, a: f64, b: f64) -> Complex64 {
        self.modes()
            .map(|(n, c)| {
                if n == 0 {
                    c * (b - a)
                } else {
                    let nf = n as f64;
                    c * (Complex64::from_polar(1.0, nf * b) - Complex64::from_polar(1.0, nf * a))
                        / (I * nf)
                }
            })
            .sum()
    }

    /// Largest |c_n - d_n| over all modes of either polynomial.
    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        let d = self.degree.max(other.degree) as i64;
        (-d..=d)
            .map(|n| (self.coeff(n) - other.coeff(n)).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest |c_{-n} - conj(c_n)|; zero iff the polynomial is real-valued.
    pub fn reality_defect(&self) -> f64 {
        self.modes()
            .map(|(n, c)| (self.coeff(-n) - c.conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        let d = self.degree.max(other.degree);
        let mut p = Self::zero(d);
        for n in -(d as i64)..=d as i64 {
            *p.coeff_mut(n) = f(self.coeff(n), other.coeff(n));
        }
        p
    }
}

impl Add for &TrigPoly {
    type Output = TrigPoly;
    fn add(self, rhs: &TrigPoly) -> TrigPoly {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &TrigPoly {
    type Output = TrigPoly;
    fn sub(self, rhs: &TrigPoly) -> TrigPoly {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &TrigPoly {
    type Output = TrigPoly;
    fn neg(self) -> TrigPoly {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul<f64> for &TrigPoly {
    type Output = TrigPoly;
    fn mul(self, rhs: f64) -> TrigPoly {
        self.scale(Complex64::new(rhs, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Trapezoid rule on a uniform periodic grid; exact for trig polynomials
    /// of degree below the number of nodes.
    fn periodic_quadrature(f: impl Fn(f64) -> Complex64, nodes: usize) -> Complex64 {
        let h = 2.0 * PI / nodes as f64;
        (0..nodes).map(|k| f(-PI + k as f64 * h)).sum::<Complex64>() * h
    }

    #[test]
    fn basic_functions_evaluate_correctly() {
        for &x in &[-2.5, -0.3, 0.0, 1.1, 3.0] {
            assert!((TrigPoly::cos(2).eval(x).re - (2.0 * x).cos()).abs() < 1e-15);
            assert!((TrigPoly::sin(3).eval(x).re - (3.0 * x).sin()).abs() < 1e-15);
            assert!(TrigPoly::sin(3).eval(x).im.abs() < 1e-15);
        }
    }

    #[test]
    fn derivative_and_products_match_pointwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = TrigPoly::random(&mut rng, 6, false, false);
        let h = 1e-6;
        for &x in &[-1.7, 0.4, 2.9] {
            let fd = (p.eval(x + h) - p.eval(x - h)) / (2.0 * h);
            assert!((p.derivative().eval(x) - fd).norm() < 1e-6);
            assert!((p.mul_sin().eval(x) - p.eval(x) * x.sin()).norm() < 1e-13);
            assert!((p.mul_cos().eval(x) - p.eval(x) * x.cos()).norm() < 1e-13);
        }
    }

    #[test]
    fn inner_product_matches_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = TrigPoly::random(&mut rng, 5, false, false);
        let q = TrigPoly::random(&mut rng, 8, true, true);
        let quad = periodic_quadrature(|x| p.eval(x) * q.eval(x).conj(), 64);
        assert!((p.inner(&q) - quad).norm() < 1e-12);
        assert!((TrigPoly::exp(3).norm().powi(2) - 2.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn exact_integration() {
        let p = TrigPoly::cos(1);
        assert!(p.integrate(0.0, PI).norm() < 1e-15);
        assert!((p.integrate(0.0, PI / 2.0).re - 1.0).abs() < 1e-15);
        assert!((TrigPoly::constant(2.0).integrate(-PI, PI).re - 4.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn random_respects_flags() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = TrigPoly::random(&mut rng, 10, true, true);
        assert_eq!(p.reality_defect(), 0.0);
        assert_eq!(p.mean(), ZERO);
        assert!(p.coeffs().iter().all(|c| c.norm() <= 1.0));
        let q = TrigPoly::random(&mut rng, 10, false, false);
        assert!(q.reality_defect() > 0.0);
    }

    #[test]
    fn padding_and_trimming() {
        let p = TrigPoly::cos(2).padded(5);
        assert_eq!(p.degree(), 5);
        assert_eq!(p.trimmed(), TrigPoly::cos(2));
        assert_eq!(TrigPoly::zero(3).trimmed().degree(), 0);
        assert!(TrigPoly::from_coeffs(vec![ZERO; 4]).is_none());
    }
}
