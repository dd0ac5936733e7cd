//! Random walks on `GL_d(Q)`: exact rational linear algebra at every place,
//! Lyapunov spectra per place, flag-valued boundary maps and the diagnostics
//! that check them (law of large numbers residuals, stationarity, contraction,
//! triviality, entropy and height-ball growth).
//!
//! Core linear algebra is generic over the scalar type (see [`scalar`]); the
//! concrete aliases below are what the rest of the crate works with.

pub mod boundary;
pub mod error;
pub mod exact_matrix;
pub mod padic_linalg;
pub mod places;
pub mod scalar;
pub mod walk_engine;

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{Error, Result};
pub use exact_matrix::{Matrix, PlaceSet};
pub use places::{LogNorm, Place, Prime};
pub use scalar::{Field, Scalar};

/// Arbitrary-precision integer.
pub type Integer = num_bigint::BigInt;
/// Exact rational, always stored reduced with a positive denominator.
pub type Rational = num_rational::BigRational;
/// Square or rectangular matrix of exact rationals.
pub type RationalMatrix = Matrix<Rational>;
/// Matrix of arbitrary-precision integers.
pub type IntegerMatrix = Matrix<Integer>;
/// Double-precision matrix, used for archimedean computations.
pub type RealMatrix = Matrix<f64>;
