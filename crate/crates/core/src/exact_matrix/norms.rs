use std::collections::BTreeSet;
use std::fmt;

use nalgebra::DMatrix;
use num_bigint::BigUint;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::Matrix;
use crate::error::{Error, Result};
use crate::places::rational::to_scaled;
use crate::places::{factor, format_rational, log_abs, parse_rational, LogNorm, Place, Prime};
use crate::{Rational, RationalMatrix};

/// Scaled floating copy of an exact matrix: returns `(m, e)` with
/// `a[i][j] * exp(row_log[i] + col_log[j]) ≈ m[i][j] * 2^e`, the largest entry
/// of `m` in `[1, 2)`. Entries below the f64 range relative to the largest
/// flush to zero. `None` for the zero matrix.
pub fn to_real_scaled(
    a: &RationalMatrix,
    row_log: Option<&[f64]>,
    col_log: Option<&[f64]>,
) -> Option<(DMatrix<f64>, i64)> {
    let (rows, cols) = (a.rows(), a.cols());
    let mut parts = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let (sign, mantissa, exp) = to_scaled(&a[(r, c)]);
            if sign == 0 {
                parts.push(None);
                continue;
            }
            let shift = row_log.map_or(0.0, |l| l[r]) + col_log.map_or(0.0, |l| l[c]);
            let shift2 = shift / std::f64::consts::LN_2;
            let whole = shift2.floor();
            let m = sign as f64 * mantissa * (shift2 - whole).exp2();
            parts.push(Some((m, exp + whole as i64)));
        }
    }
    let top = parts.iter().flatten().map(|&(_, e)| e).max()?;
    let m = DMatrix::from_fn(rows, cols, |r, c| match parts[r * cols + c] {
        Some((m, e)) => {
            let rel = (e - top).max(-1100) as i32;
            m * 2f64.powi(rel)
        }
        None => 0.0,
    });
    Some((m, top))
}

/// `ln` of the Euclidean operator norm of `diag(e^row_log) * a * diag(e^col_log)`,
/// computed from a rescaled f64 copy (relative accuracy ~1e-15).
pub fn log_spectral_norm(
    a: &RationalMatrix,
    row_log: Option<&[f64]>,
    col_log: Option<&[f64]>,
) -> LogNorm {
    match to_real_scaled(a, row_log, col_log) {
        None => LogNorm::NegInfinity,
        Some((m, e)) => {
            let sigma = m.singular_values().max();
            LogNorm::Real(sigma.ln() + e as f64 * std::f64::consts::LN_2)
        }
    }
}

/// `ln ||g||_place`. At a finite place the operator norm for the sup vector
/// norm is the largest entry norm; at infinity it is the spectral norm.
pub fn op_log_norm(g: &RationalMatrix, place: Place) -> LogNorm {
    match place {
        Place::Infinity => log_spectral_norm(g, None, None),
        Place::Finite(_) => g
            .entries()
            .filter(|x| !x.is_zero())
            .map(|x| log_abs(x, place))
            .min_by_key(|l| l.valuation().expect("finite place"))
            .unwrap_or(LogNorm::NegInfinity),
    }
}

fn check_pair(g: &RationalMatrix, h: &RationalMatrix) -> Result<(RationalMatrix, RationalMatrix)> {
    if !g.is_square() || g.rows() != h.rows() || !h.is_square() {
        return Err(Error::dims(
            format!("{0}x{0}", g.rows()),
            format!("{}x{}", h.rows(), h.cols()),
        ));
    }
    let gi = g.inverse()?;
    let hi = h.inverse()?;
    Ok((&gi * h, &hi * g))
}

/// `d_p(g, h) / ln p` at a finite place, as an exact integer.
pub fn dp_dist_units(g: &RationalMatrix, h: &RationalMatrix, p: Prime) -> Result<i64> {
    let (gh, hg) = check_pair(g, h)?;
    let place = Place::Finite(p);
    let units = |m: &RationalMatrix| op_log_norm(m, place).positive_units().expect("finite");
    Ok(units(&gh) + units(&hg))
}

/// `d_p(g, h) = ln^+ ||g^-1 h||_p + ln^+ ||h^-1 g||_p`.
pub fn dp_dist(g: &RationalMatrix, h: &RationalMatrix, place: Place) -> Result<f64> {
    match place {
        Place::Finite(p) => Ok(dp_dist_units(g, h, p)? as f64 * p.ln()),
        Place::Infinity => {
            let (gh, hg) = check_pair(g, h)?;
            Ok(op_log_norm(&gh, place).positive_part() + op_log_norm(&hg, place).positive_part())
        }
    }
}

/// `d(g, h) = sum_p d_p(g, h)`; only places dividing an entry of `g^-1 h` or
/// `h^-1 g` (and infinity) contribute.
pub fn adelic_dist(g: &RationalMatrix, h: &RationalMatrix) -> Result<f64> {
    let (gh, hg) = check_pair(g, h)?;
    let mut primes = BTreeSet::new();
    collect_primes(&gh, &mut primes);
    collect_primes(&hg, &mut primes);
    let mut total = dp_dist(g, h, Place::Infinity)?;
    for p in primes {
        total += dp_dist(g, h, Place::Finite(p))?;
    }
    Ok(total)
}

/// The archimedean place plus a sorted, duplicate-free set of primes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PlaceSet {
    primes: Vec<Prime>,
}

impl PlaceSet {
    pub fn new(primes: impl IntoIterator<Item = Prime>) -> Self {
        let set: BTreeSet<Prime> = primes.into_iter().collect();
        Self {
            primes: set.into_iter().collect(),
        }
    }

    pub fn primes(&self) -> &[Prime] {
        &self.primes
    }

    pub fn includes_infinity(&self) -> bool {
        true
    }

    /// Infinity first, then the primes ascending.
    pub fn places(&self) -> Vec<Place> {
        std::iter::once(Place::Infinity)
            .chain(self.primes.iter().copied().map(Place::Finite))
            .collect()
    }

    pub fn contains(&self, place: Place) -> bool {
        match place {
            Place::Infinity => true,
            Place::Finite(p) => self.primes.binary_search(&p).is_ok(),
        }
    }
}

impl Serialize for PlaceSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.places())
    }
}

impl fmt::Display for PlaceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.places().iter().map(Place::to_string).collect();
        write!(f, "{{{}}}", names.join(", "))
    }
}

fn collect_primes(m: &RationalMatrix, out: &mut BTreeSet<Prime>) {
    let mut add = |n: &num_bigint::BigInt| {
        let n: BigUint = n.abs().to_biguint().expect("nonnegative");
        for (b, _) in factor(&n) {
            let p = u64::try_from(&b).expect("prime factors of matrix entries fit in 64 bits");
            out.insert(Prime::new(p).expect("factor returns primes"));
        }
    };
    for x in m.entries().filter(|x| !x.is_zero()) {
        add(x.numer());
        add(x.denom());
    }
}

/// Infinity plus every prime dividing a numerator or denominator of an entry
/// of some atom or its inverse. Outside this set every atom is a `p`-adic
/// isometry.
pub fn relevant_places(atoms: &[RationalMatrix]) -> Result<PlaceSet> {
    let mut primes = BTreeSet::new();
    for g in atoms {
        collect_primes(g, &mut primes);
        collect_primes(&g.inverse()?, &mut primes);
    }
    Ok(PlaceSet::new(primes))
}

/// Parse an array of rows of rational strings.
pub fn matrix_from_strings(rows: &[Vec<String>]) -> Result<RationalMatrix> {
    let parsed = rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, s)| {
                    parse_rational(s)
                        .map_err(|e| Error::parse(format!("[{i}][{j}]"), e.to_string()))
                })
                .collect::<Result<Vec<Rational>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Matrix::from_rows(parsed)
}

pub fn matrix_to_strings(m: &RationalMatrix) -> Vec<Vec<String>> {
    m.to_rows()
        .iter()
        .map(|r| r.iter().map(format_rational).collect())
        .collect()
}
