use num_integer::Integer as _;
use num_traits::ToPrimitive;

use super::WalkPath;
use crate::error::{Error, Result};
use crate::exact_matrix::{dp_dist_units, log_spectral_norm};
use crate::padic_linalg::{Flag, ParabolicSpec};
use crate::places::Place;
use crate::{Integer, Rational, RationalMatrix, RealMatrix};

/// The model diagonal `Λ_n` realising the exponents at scale `n`.
#[derive(Debug, Clone, PartialEq)]
pub enum LambdaMatrix {
    /// Finite place: `diag(p^{-floor(n c_i)})` where `λ_i = c_i ln p`.
    Exact(RationalMatrix),
    /// Infinity: `diag(e^{n λ_i})`, kept as the logs `n λ_i`.
    LogDiagonal(Vec<f64>),
}

impl LambdaMatrix {
    /// Floating view (entries may overflow to `inf` / underflow to 0).
    pub fn to_real(&self) -> RealMatrix {
        match self {
            LambdaMatrix::Exact(m) => m.map(crate::places::rational::to_f64),
            LambdaMatrix::LogDiagonal(logs) => {
                RealMatrix::diagonal(logs.iter().map(|l| l.exp()).collect())
            }
        }
    }
}

fn floor_rational(q: &Rational) -> Integer {
    q.numer().div_floor(q.denom())
}

pub fn lambda_matrix(spec: &ParabolicSpec, n: usize) -> Result<LambdaMatrix> {
    if n == 0 {
        return Err(Error::OutOfRange {
            what: "n",
            detail: "must be at least 1".into(),
        });
    }
    match spec.place() {
        Place::Finite(p) => {
            let units = spec.log_p_units().ok_or_else(|| Error::OutOfRange {
                what: "spectrum",
                detail: "finite-place spectrum lacks exact ln p coefficients".into(),
            })?;
            let base = Rational::from_integer(p.to_bigint());
            let nq = Rational::from_integer(n.into());
            let diag = units
                .iter()
                .map(|c| {
                    let e =
                        floor_rational(&(c * &nq))
                            .to_i32()
                            .ok_or_else(|| Error::OutOfRange {
                                what: "n",
                                detail: "Lambda_n exponent exceeds 32 bits".into(),
                            })?;
                    Ok(base.pow(-e))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(LambdaMatrix::Exact(RationalMatrix::diagonal(diag)))
        }
        Place::Infinity => Ok(LambdaMatrix::LogDiagonal(
            spec.exponents().iter().map(|l| l * n as f64).collect(),
        )),
    }
}

/// `(1/n) d_place(x_n, b Λ_n)` for an explicit basis `b`.
pub fn lln_residual_for_basis(
    path: &WalkPath,
    b: &RationalMatrix,
    spec: &ParabolicSpec,
    n: usize,
) -> Result<f64> {
    if n > path.len() {
        return Err(Error::OutOfRange {
            what: "n",
            detail: format!("{n} exceeds path length {}", path.len()),
        });
    }
    let x = path.product(n);
    if b.rows() != x.rows() || !b.is_square() || spec.dim() != x.rows() {
        return Err(Error::dims(x.rows(), b.rows()));
    }
    let nf = n as f64;
    match lambda_matrix(spec, n)? {
        LambdaMatrix::Exact(lambda) => {
            let p = spec.place().prime().expect("finite");
            let units = dp_dist_units(x, &(b * &lambda), p)?;
            Ok(units as f64 * p.ln() / nf)
        }
        LambdaMatrix::LogDiagonal(logs) => {
            let binv = b.inverse()?;
            let xinv = x.inverse()?;
            let forward = &xinv * b;
            let backward = &binv * x;
            let neg: Vec<f64> = logs.iter().map(|l| -l).collect();
            let a = log_spectral_norm(&forward, None, Some(&logs)).positive_part();
            let c = log_spectral_norm(&backward, Some(&neg), None).positive_part();
            Ok((a + c) / nf)
        }
    }
}

/// `(1/n) d_place(x_n, b Λ_n)` with `b` the canonical completion of `flag`.
pub fn lln_residual(path: &WalkPath, flag: &Flag, spec: &ParabolicSpec, n: usize) -> Result<f64> {
    if flag.place() != spec.place() {
        return Err(Error::PlaceMismatch(
            flag.place().to_string(),
            spec.place().to_string(),
        ));
    }
    if flag.dims() != spec.dims() {
        return Err(Error::dims(
            format!("{:?}", spec.dims()),
            format!("{:?}", flag.dims()),
        ));
    }
    lln_residual_for_basis(path, &flag.completion(), spec, n)
}
