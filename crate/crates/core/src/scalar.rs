//! Scalar abstraction for the generic linear algebra in [`crate::exact_matrix`].
//!
//! Exact types (`BigInt`, `BigRational`) treat only zero as negligible and take
//! the first nonzero pivot, so Bareiss intermediates stay minors of the input.
//! Floating types use partial pivoting and an absolute threshold.

use std::fmt::Debug;
use std::hash::Hash;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive, Zero};

/// Pivot threshold used for floating-point elimination.
pub const FLOAT_PIVOT_EPS: f64 = 1e-9;

pub trait Scalar:
    Num + Clone + Debug + PartialEq + Send + Sync + std::ops::Neg<Output = Self>
{
    /// Exact types pick the first nonzero pivot; inexact ones pick the largest.
    const EXACT: bool;

    fn is_negligible(&self) -> bool;

    /// Magnitude used to rank pivot candidates and for diagnostics.
    fn magnitude(&self) -> f64;
}

/// Scalars where `/` is the exact field inverse.
pub trait Field: Scalar {}

/// Scalars that can be used as hash keys (exact types only).
pub trait ExactScalar: Scalar + Eq + Hash {}

impl Scalar for BigInt {
    const EXACT: bool = true;
    fn is_negligible(&self) -> bool {
        self.is_zero()
    }
    fn magnitude(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::INFINITY)
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;
    fn is_negligible(&self) -> bool {
        self.is_zero()
    }
    fn magnitude(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::INFINITY)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    fn is_negligible(&self) -> bool {
        self.abs() < FLOAT_PIVOT_EPS
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;
    fn is_negligible(&self) -> bool {
        (self.abs() as f64) < FLOAT_PIVOT_EPS
    }
    fn magnitude(&self) -> f64 {
        self.abs() as f64
    }
}

impl Field for BigRational {}
impl Field for f64 {}
impl Field for f32 {}

impl ExactScalar for BigInt {}
impl ExactScalar for BigRational {}
