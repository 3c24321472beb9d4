//! LU factorization of tridiagonal matrices with partial pivoting.
//!
//! Row interchanges introduce a second superdiagonal in U, as in LAPACK's
//! `?gttrf`/`?gttrs`. Works over `f64` and `Complex64`.

use nalgebra::ComplexField;

use crate::error::{Error, Result};
use crate::tridiag::TridiagonalMatrix;

#[derive(Debug, Clone)]
pub struct TridiagonalLu<T> {
    /// multipliers of L
    dl: Vec<T>,
    /// diagonal of U
    d: Vec<T>,
    /// first superdiagonal of U
    du: Vec<T>,
    /// second superdiagonal of U (fill-in from pivoting)
    du2: Vec<T>,
    swapped: Vec<bool>,
}

impl<T> TridiagonalLu<T>
where
    T: ComplexField<RealField = f64> + Copy,
{
    pub fn factor(m: &TridiagonalMatrix<T>) -> Result<Self> {
        let n = m.order();
        let mut dl = m.lower.clone();
        let mut d = m.diag.clone();
        let mut du = m.upper.clone();
        let mut du2 = vec![T::zero(); n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];

        for i in 0..n.saturating_sub(1) {
            if d[i].modulus() >= dl[i].modulus() {
                if d[i].modulus() == 0.0 {
                    return Err(Error::Singular);
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        if d[n - 1].modulus() == 0.0 {
            return Err(Error::Singular);
        }
        Ok(Self {
            dl,
            d,
            du,
            du2,
            swapped,
        })
    }

    pub fn order(&self) -> usize {
        self.d.len()
    }

    /// Overwrites `b` with the solution of A x = b.
    pub fn solve_in_place(&self, b: &mut [T]) {
        let n = self.order();
        debug_assert_eq!(b.len(), n);
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                let bi = b[i];
                b[i + 1] -= self.dl[i] * bi;
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Smallest |u_ii|; a cheap singularity indicator.
    pub fn min_pivot(&self) -> f64 {
        self.d.iter().map(|v| v.modulus()).fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tridiag::Label;
    use num_complex::Complex64;

    #[test]
    fn solves_against_dense_lu() {
        // zero leading diagonal forces a row interchange
        let m = TridiagonalMatrix::new(
            vec![0.0, 2.0, -1.0, 4.0, 3.0],
            vec![1.0, 5.0, 2.0, -2.0],
            vec![3.0, -4.0, 1.0, 6.0],
            Label::Other,
        )
        .unwrap();
        let b = vec![1.0, -2.0, 0.5, 3.0, 7.0];
        let x = TridiagonalLu::factor(&m).unwrap().solve(&b);
        let dense = m.to_dense().lu().solve(&nalgebra::DVector::from_vec(b)).unwrap();
        for (a, e) in x.iter().zip(dense.iter()) {
            assert!((a - e).abs() < 1e-13);
        }
    }

    #[test]
    fn complex_solve_residual() {
        let m = TridiagonalMatrix::new(
            vec![Complex64::new(1.0, 2.0), Complex64::new(0.0, -1.0), Complex64::new(3.0, 0.0)],
            vec![Complex64::new(2.0, 0.0), Complex64::new(0.5, 0.5)],
            vec![Complex64::new(-1.0, 1.0), Complex64::new(4.0, 0.0)],
            Label::Other,
        )
        .unwrap();
        let b = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(2.0, -1.0)];
        let x = TridiagonalLu::factor(&m).unwrap().solve(&b);
        let r = m.matvec(&x).unwrap();
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).norm() < 1e-14);
        }
    }

    #[test]
    fn detects_exact_singularity() {
        let m = TridiagonalMatrix::new(vec![1.0, 1.0], vec![1.0], vec![1.0], Label::Other).unwrap();
        assert!(matches!(TridiagonalLu::factor(&m), Err(Error::Singular)));
        let one = TridiagonalMatrix::new(vec![2.0], vec![], vec![], Label::Other).unwrap();
        assert_eq!(TridiagonalLu::factor(&one).unwrap().solve(&[4.0]), vec![2.0]);
    }
}
