//! Tridiagonal matrices stored as three bands.
//!
//! The same container holds truncations of the Fourier-space operators
//! (1-based row indices), the two-sided M-matrix and Galerkin matrices, and
//! complex shifted copies used by the solvers. Entries are generic so the
//! algebraic identities can be checked in exact rational arithmetic.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Real scalar field used by the matrix builders: `f64` for numerics,
/// `Rational64` for exact identity checks.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialOrd
    + Signed
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_i64(v: i64) -> Self;
    fn to_f64(&self) -> f64;
}

impl Scalar for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for Rational64 {
    fn from_i64(v: i64) -> Self {
        Rational64::from_integer(v)
    }
    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

/// The diffusion parameter. `new` enforces 0 < ε < 2, the range in which the
/// factorization and the invertibility of M hold; `unchecked` is the
/// explicit escape hatch for degenerate and exploratory runs (ε = 0 included).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Epsilon<T = f64>(T);

impl<T: Scalar> Epsilon<T> {
    pub fn new(value: T) -> Result<Self> {
        let v = value.to_f64();
        if v.is_finite() && v > 0.0 && v < 2.0 {
            Ok(Self(value))
        } else {
            Err(Error::InvalidEpsilon(v))
        }
    }

    pub fn unchecked(value: T) -> Self {
        Self(value)
    }

    pub fn value(&self) -> T {
        self.0.clone()
    }
}

impl Epsilon<f64> {
    pub fn get(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    A,
    B,
    C,
    J,
    M,
    Galerkin,
    Other,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Label::A => "A",
            Label::B => "B",
            Label::C => "C",
            Label::J => "J",
            Label::M => "M",
            Label::Galerkin => "Galerkin",
            Label::Other => "Other",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "A" => Label::A,
            "B" => Label::B,
            "C" => Label::C,
            "J" => Label::J,
            "M" => Label::M,
            "Galerkin" => Label::Galerkin,
            "Other" => Label::Other,
            other => return Err(Error::Parse(format!("unknown matrix label `{other}`"))),
        })
    }
}

/// Square tridiagonal matrix. `upper[k]` is entry (k, k+1) and `lower[k]` is
/// entry (k+1, k), both 0-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TridiagonalMatrix<T> {
    pub label: Label,
    pub epsilon: Option<T>,
    pub diag: Vec<T>,
    #[serde(rename = "super")]
    pub upper: Vec<T>,
    #[serde(rename = "sub")]
    pub lower: Vec<T>,
}

impl<T> TridiagonalMatrix<T> {
    pub fn new(diag: Vec<T>, upper: Vec<T>, lower: Vec<T>, label: Label) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(Error::InvalidOrder);
        }
        if upper.len() != n - 1 || lower.len() != n - 1 {
            return Err(Error::DimensionMismatch(format!(
                "order {n} needs bands of length {}, got super {} and sub {}",
                n - 1,
                upper.len(),
                lower.len()
            )));
        }
        Ok(Self {
            label,
            epsilon: None,
            diag,
            upper,
            lower,
        })
    }

    pub fn with_epsilon(mut self, eps: T) -> Self {
        self.epsilon = Some(eps);
        self
    }

    pub fn order(&self) -> usize {
        self.diag.len()
    }

    pub fn map<U, F: Fn(&T) -> U>(&self, f: F) -> TridiagonalMatrix<U> {
        TridiagonalMatrix {
            label: self.label,
            epsilon: self.epsilon.as_ref().map(&f),
            diag: self.diag.iter().map(&f).collect(),
            upper: self.upper.iter().map(&f).collect(),
            lower: self.lower.iter().map(&f).collect(),
        }
    }
}

impl<T: Clone + Zero> TridiagonalMatrix<T> {
    /// Entry (i, j), 0-based; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> T {
        if i == j {
            self.diag[i].clone()
        } else if j == i + 1 {
            self.upper[i].clone()
        } else if i == j + 1 {
            self.lower[j].clone()
        } else {
            T::zero()
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            label: self.label,
            epsilon: self.epsilon.clone(),
            diag: self.diag.clone(),
            upper: self.lower.clone(),
            lower: self.upper.clone(),
        }
    }

    pub fn matvec(&self, x: &[T]) -> Result<Vec<T>>
    where
        T: Mul<Output = T> + Add<Output = T>,
    {
        let n = self.order();
        if x.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "matrix of order {n} applied to vector of length {}",
                x.len()
            )));
        }
        Ok((0..n)
            .map(|i| {
                let mut acc = self.diag[i].clone() * x[i].clone();
                if i + 1 < n {
                    acc = acc + self.upper[i].clone() * x[i + 1].clone();
                }
                if i > 0 {
                    acc = acc + self.lower[i - 1].clone() * x[i - 1].clone();
                }
                acc
            })
            .collect())
    }

    /// The five bands (offsets -2..=2) of the product `self * other`.
    pub fn product_bands(&self, other: &Self) -> Result<[Vec<T>; 5]>
    where
        T: Mul<Output = T> + Add<Output = T>,
    {
        let n = self.order();
        if other.order() != n {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply orders {n} and {}",
                other.order()
            )));
        }
        let mut bands: [Vec<T>; 5] = Default::default();
        for (slot, offset) in bands.iter_mut().zip(-2i64..=2) {
            let len = n.saturating_sub(offset.unsigned_abs() as usize);
            *slot = (0..len)
                .map(|k| {
                    let (i, j) = if offset >= 0 {
                        (k, k + offset as usize)
                    } else {
                        (k + offset.unsigned_abs() as usize, k)
                    };
                    let lo = i.saturating_sub(1).max(j.saturating_sub(1));
                    let hi = (i + 1).min(j + 1).min(n - 1);
                    (lo..=hi).fold(T::zero(), |acc, m| {
                        acc + self.get(i, m) * other.get(m, j)
                    })
                })
                .collect();
        }
        Ok(bands)
    }
}

impl<T: Scalar> TridiagonalMatrix<T> {
    pub fn max_abs_entry(&self) -> T {
        self.diag
            .iter()
            .chain(&self.upper)
            .chain(&self.lower)
            .map(|v| v.abs())
            .fold(T::zero(), larger)
    }

    /// Largest entrywise |self - other|.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        if self.order() != other.order() {
            return Err(Error::DimensionMismatch(format!(
                "orders {} and {} differ",
                self.order(),
                other.order()
            )));
        }
        let d = max_abs_pairwise(&self.diag, &other.diag);
        let u = max_abs_pairwise(&self.upper, &other.upper);
        let l = max_abs_pairwise(&self.lower, &other.lower);
        Ok(larger(larger(d, u), l))
    }
}

impl TridiagonalMatrix<f64> {
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let n = self.order();
        nalgebra::DMatrix::from_fn(n, n, |i, j| self.get(i, j))
    }

    pub fn to_complex(&self) -> TridiagonalMatrix<Complex64> {
        self.map(|&v| Complex64::new(v, 0.0))
    }
}

impl TridiagonalMatrix<Complex64> {
    pub fn to_dense(&self) -> nalgebra::DMatrix<Complex64> {
        let n = self.order();
        nalgebra::DMatrix::from_fn(n, n, |i, j| self.get(i, j))
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.order() != other.order() {
            return Err(Error::DimensionMismatch(format!(
                "orders {} and {} differ",
                self.order(),
                other.order()
            )));
        }
        let pairs = self
            .diag
            .iter()
            .zip(&other.diag)
            .chain(self.upper.iter().zip(&other.upper))
            .chain(self.lower.iter().zip(&other.lower));
        Ok(pairs.map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }
}

fn larger<T: PartialOrd>(a: T, b: T) -> T {
    if b > a {
        b
    } else {
        a
    }
}

fn max_abs_pairwise<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x.clone() - y.clone()).abs())
        .fold(T::zero(), larger)
}
