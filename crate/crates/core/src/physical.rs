//! The operators L, L*, M, S and the reflection J acting on trigonometric
//! polynomials, together with the domain norms of L.
//!
//! L y = ε (sin x · y')' + y' maps mode n to
//!   i n               (mode n),
//!   i ε n(n+1) / 2    (mode n + 1),
//!  -i ε n(n-1) / 2    (mode n - 1);
//! L* differs only in the sign of the convective term.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::Result;
use crate::fourier::build_m_matrix;
use crate::spectral::smallest_singular_value;
use crate::trig::TrigPoly;
use crate::tridiag::Epsilon;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn convection_diffusion(y: &TrigPoly, eps: f64, convective_sign: f64) -> TrigPoly {
    // Gather form: each output mode is (from below + from above) + diagonal,
    // with the integer factors n(n±1) formed exactly. Reflecting the modes
    // then reproduces the same operands, so J L* J agrees with L bit for bit.
    let deg = y.degree() as i64 + 1;
    let coupling = |a: i64, b: i64| I * (eps * ((a * b) as f64) * 0.5);
    let coeffs = (-deg..=deg)
        .map(|m| {
            let below = y.coeff(m - 1) * coupling(m - 1, m);
            let above = y.coeff(m + 1) * -coupling(m + 1, m);
            let diag = y.coeff(m) * (I * (m as f64 * convective_sign));
            (below + above) + diag
        })
        .collect();
    TrigPoly::from_coeffs(coeffs).expect("odd coefficient count")
}

/// L y = ε (sin x · y')' + y'.
pub fn apply_l(y: &TrigPoly, eps: Epsilon) -> TrigPoly {
    convection_diffusion(y, eps.get(), 1.0)
}

/// L* y = ε (sin x · y')' - y'.
pub fn apply_l_star(y: &TrigPoly, eps: Epsilon) -> TrigPoly {
    convection_diffusion(y, eps.get(), -1.0)
}

/// M y = ε (sin x · y)' + y, by the column recurrence of the M-matrix.
pub fn apply_m(y: &TrigPoly, eps: Epsilon) -> TrigPoly {
    let e = eps.get();
    let mut modes = Vec::with_capacity(3 * y.coeffs().len());
    for (n, c) in y.modes() {
        let nf = n as f64;
        modes.push((n, c));
        modes.push((n + 1, c * (e * (nf + 1.0) / 2.0)));
        modes.push((n - 1, c * (-e * (nf - 1.0) / 2.0)));
    }
    TrigPoly::from_modes(&modes).padded(y.degree() + 1)
}

/// S y = y'.
pub fn apply_s(y: &TrigPoly) -> TrigPoly {
    y.derivative()
}

/// (J y)(x) = y(π - x), i.e. (J y)_m = (-1)^m c_{-m}.
pub fn apply_j(y: &TrigPoly) -> TrigPoly {
    let modes: Vec<_> = y
        .modes()
        .map(|(n, c)| {
            let sign = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            (-n, c * sign)
        })
        .collect();
    TrigPoly::from_modes(&modes).padded(y.degree())
}

/// Coefficientwise max |J L* J y - L y|.
pub fn check_jlj(y: &TrigPoly, eps: Epsilon) -> f64 {
    let lhs = apply_j(&apply_l_star(&apply_j(y), eps));
    lhs.max_coeff_diff(&apply_l(y, eps))
}

/// Coefficientwise max |L y - M(S y)|.
pub fn check_l_equals_ms(y: &TrigPoly, eps: Epsilon) -> f64 {
    apply_l(y, eps).max_coeff_diff(&apply_m(&apply_s(y), eps))
}

/// Graph norm { ‖y‖² + ‖L y‖² }^{1/2}.
pub fn norm_g(y: &TrigPoly, eps: Epsilon) -> f64 {
    y.norm().hypot(apply_l(y, eps).norm())
}

/// { ‖y'‖² + ‖sin x · y'‖² + ‖(sin x · y')'‖² }^{1/2}.
pub fn norm_m(y: &TrigPoly) -> f64 {
    let dy = y.derivative();
    let s = dy.mul_sin();
    let ds = s.derivative();
    (dy.norm().powi(2) + s.norm().powi(2) + ds.norm().powi(2)).sqrt()
}

/// Upper equivalence constant max{3, 2ε}: norm_g <= p2 · norm_m on {const}^⊥.
pub fn p2(eps: Epsilon) -> f64 {
    3f64.max(2.0 * eps.get())
}

/// Lower equivalence constant min{p1/6, 1/2}.
pub fn p3(p1: f64) -> f64 {
    (p1 / 6.0).min(0.5)
}

/// Empirical lower bound for ‖M y‖ >= p1 ‖y‖: the smallest singular value of
/// the M-matrix on modes -N..N.
pub fn estimate_p1(n: usize, eps: Epsilon) -> Result<f64> {
    smallest_singular_value(&build_m_matrix(n, &eps)?)
}

/// (∫_0^π θ, ∫_{-π}^0 θ) in modulus for θ = (sin x · y)'. Both vanish because
/// sin x · y is zero at 0 and ±π.
pub fn check_theta_constraints(y: &TrigPoly) -> (f64, f64) {
    let theta = y.mul_sin().derivative();
    (
        theta.integrate(0.0, PI).norm(),
        theta.integrate(-PI, 0.0).norm(),
    )
}

/// |∫ M y - ∫ y| over (-π, π).
pub fn check_m_mean_invariance(y: &TrigPoly, eps: Epsilon) -> f64 {
    2.0 * PI * (apply_m(y, eps).mean() - y.mean()).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn eps(v: f64) -> Epsilon {
        Epsilon::new(v).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// L y evaluated pointwise by central differences of the closed form.
    fn l_pointwise(y: &TrigPoly, e: f64, x: f64) -> Complex64 {
        let h = 1e-4;
        let dy = |t: f64| (y.eval(t + h) - y.eval(t - h)) / (2.0 * h);
        let flux = |t: f64| dy(t) * t.sin();
        e * (flux(x + h) - flux(x - h)) / (2.0 * h) + dy(x)
    }

    #[test]
    fn l_kills_constants() {
        assert_eq!(apply_l(&TrigPoly::constant(3.0), eps(0.8)).max_abs_coeff(), 0.0);
        assert_eq!(apply_l_star(&TrigPoly::constant(3.0), eps(0.8)).max_abs_coeff(), 0.0);
    }

    #[test]
    fn l_of_cos() {
        let e = 0.7;
        let expected = &(&TrigPoly::sin(2) * -e) - &TrigPoly::sin(1);
        assert!(apply_l(&TrigPoly::cos(1), eps(e)).max_coeff_diff(&expected) < 1e-16);
        let expected_star = &(&TrigPoly::sin(2) * -e) + &TrigPoly::sin(1);
        assert!(apply_l_star(&TrigPoly::cos(1), eps(e)).max_coeff_diff(&expected_star) < 1e-16);
    }

    #[test]
    fn l_of_exponential() {
        let e = 1.3;
        let expected = TrigPoly::from_modes(&[(2, c(0.0, e)), (1, c(0.0, 1.0))]);
        assert!(apply_l(&TrigPoly::exp(1), eps(e)).max_coeff_diff(&expected) < 1e-16);
    }

    #[test]
    fn l_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let y = TrigPoly::random(&mut rng, 4, true, false);
        let e = 0.9;
        let ly = apply_l(&y, eps(e));
        for &x in &[-2.0, -0.5, 0.3, 2.7] {
            assert!((ly.eval(x) - l_pointwise(&y, e, x)).norm() < 1e-5);
        }
    }

    #[test]
    fn j_examples() {
        assert_eq!(apply_j(&TrigPoly::constant(1.0)), TrigPoly::constant(1.0));
        assert!(apply_j(&TrigPoly::sin(1)).max_coeff_diff(&TrigPoly::sin(1)) < 1e-16);
        let expected = TrigPoly::from_modes(&[(-1, c(-1.0, 0.0))]);
        assert_eq!(apply_j(&TrigPoly::exp(1)).trimmed(), expected);
        let y = TrigPoly::exp(3);
        for &x in &[0.2, 1.9] {
            assert!((apply_j(&y).eval(x) - y.eval(PI - x)).norm() < 1e-14);
        }
    }

    #[test]
    fn jlj_examples() {
        assert_eq!(check_jlj(&TrigPoly::constant(1.0), eps(1.0)), 0.0);
        assert!(check_jlj(&TrigPoly::cos(1), eps(1.0)) <= 1e-15);
    }

    #[test]
    fn adjoint_by_brute_force_inner_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let y = TrigPoly::random(&mut rng, 20, true, false);
            let z = TrigPoly::random(&mut rng, 20, true, false);
            let e = eps(0.6);
            let lhs = apply_l(&y, e).inner(&z);
            let rhs = y.inner(&apply_l_star(&z, e));
            let scale = apply_l(&y, e).norm() * z.norm();
            assert!((lhs - rhs).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn norms_of_constant() {
        let one = TrigPoly::constant(1.0);
        assert!((norm_g(&one, eps(1.0)) - (2.0 * PI).sqrt()).abs() < 1e-15);
        assert_eq!(norm_m(&one), 0.0);
    }

    #[test]
    fn norm_m_of_exponential_matches_quadrature() {
        let y = TrigPoly::exp(1);
        // y' = i e^{ix}; sin x · y' and its derivative evaluated pointwise
        let nodes = 10_000;
        let h = 2.0 * PI / nodes as f64;
        let mut acc = 0.0;
        for k in 0..nodes {
            let x = -PI + k as f64 * h;
            let dy = Complex64::new(0.0, 1.0) * Complex64::from_polar(1.0, x);
            let s = dy * x.sin();
            // (sin x · i e^{ix})' = i cos x e^{ix} - sin x e^{ix}
            let ds = Complex64::new(0.0, 1.0) * x.cos() * Complex64::from_polar(1.0, x)
                - x.sin() * Complex64::from_polar(1.0, x);
            acc += (dy.norm_sqr() + s.norm_sqr() + ds.norm_sqr()) * h;
        }
        assert!((norm_m(&y) - acc.sqrt()).abs() < 1e-12);
        // Parseval: ‖i e^{ix}‖² + ‖(e^{2ix} - 1)/2‖² + ‖i e^{2ix}‖² = 2π (1 + 1/2 + 1)
        assert!((norm_m(&y).powi(2) - 2.0 * PI * 2.5).abs() < 1e-12);
    }

    #[test]
    fn theta_and_mean_examples() {
        for y in [TrigPoly::constant(1.0), TrigPoly::cos(1)] {
            let (a, b) = check_theta_constraints(&y);
            assert!(a < 1e-15 && b < 1e-15, "{a} {b}");
        }
        assert!(check_m_mean_invariance(&TrigPoly::constant(1.0), eps(0.5)) < 1e-15);
        assert_eq!(check_m_mean_invariance(&TrigPoly::exp(1), eps(0.5)), 0.0);
        // M·1 = 1 + ε cos x
        let m1 = apply_m(&TrigPoly::constant(1.0), eps(0.5));
        assert!(m1.max_coeff_diff(&(&TrigPoly::constant(1.0) + &(&TrigPoly::cos(1) * 0.5))) < 1e-16);
    }

    #[test]
    fn p1_degenerate_and_positive() {
        let tiny = estimate_p1(16, eps(1e-12)).unwrap();
        assert!((tiny - 1.0).abs() < 1e-9);
        let p = estimate_p1(64, eps(1.0)).unwrap();
        let dense = build_m_matrix(64, &eps(1.0)).unwrap().to_dense();
        let oracle = dense.singular_values().min();
        assert!((p - oracle).abs() < 1e-10, "{p} vs {oracle}");
        let trend: Vec<f64> = [64, 128, 256].iter().map(|&n| estimate_p1(n, eps(1.0)).unwrap()).collect();
        assert!(trend.iter().all(|&v| v > 0.5), "{trend:?}");
        assert!(estimate_p1(256, eps(1.9)).unwrap() < trend[2]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn identities_on_random_polynomials(seed in any::<u64>(), degree in 0usize..30, e in 0.05f64..1.95) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let y = TrigPoly::random(&mut rng, degree, true, false);
            let e = eps(e);
            let scale = 1.0 + apply_l(&y, e).max_abs_coeff();
            prop_assert!(check_jlj(&y, e) <= 1e-13 * scale);
            prop_assert!(check_l_equals_ms(&y, e) <= 1e-14 * scale);
            prop_assert_eq!(apply_j(&apply_j(&y)), y.clone());
            prop_assert!(check_m_mean_invariance(&y, e) <= 1e-14);
            let (a, b) = check_theta_constraints(&y);
            prop_assert!(a <= 1e-13 && b <= 1e-13);
        }

        #[test]
        fn norm_bounds(seed in any::<u64>(), degree in 1usize..25, e in prop::sample::select(vec![0.5, 1.0, 1.5])) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let y = TrigPoly::random(&mut rng, degree, true, true);
            let e = eps(e);
            prop_assert!(norm_g(&y, e) <= p2(e) * norm_m(&y));
        }
    }
}
