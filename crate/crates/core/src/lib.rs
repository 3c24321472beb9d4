//! Numerical toolkit for the indefinite convection-diffusion operator
//!
//! ```text
//! L y = ε (sin x · y')' + y',   y 2π-periodic,  0 < ε < 2,
//! ```
//!
//! covering its tridiagonal Fourier-space form 𝒜 = ℬ𝒞, the physical-space
//! factorization L = M S, the reflection symmetry L = J L* J, an explicit
//! integral resolvent, the domain norms, and the truncated dynamics of
//! y_t + L y = 0.

pub mod banded;
pub mod error;
pub mod evolution;
pub mod expm;
pub mod fourier;
pub mod io;
pub mod physical;
pub mod quadrature;
pub mod resolvent;
pub mod spectral;
pub mod trig;
pub mod tridiag;

pub use error::{Error, Result};
pub use trig::TrigPoly;
pub use tridiag::{Epsilon, Label, Scalar, TridiagonalMatrix};
