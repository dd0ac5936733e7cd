use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::prime::Prime;
use super::rational::ln_abs;
use crate::error::{Error, Result};
use crate::Rational;

/// The archimedean place or a finite prime place.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Place {
    Infinity,
    Finite(Prime),
}

impl Place {
    pub fn finite(p: u64) -> Result<Self> {
        Prime::new(p).map(Place::Finite)
    }

    pub fn prime(self) -> Option<Prime> {
        match self {
            Place::Infinity => None,
            Place::Finite(p) => Some(p),
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Place::Finite(_))
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Infinity => f.write_str("inf"),
            Place::Finite(p) => write!(f, "{p}"),
        }
    }
}

impl FromStr for Place {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "inf" {
            Ok(Place::Infinity)
        } else {
            s.parse().map(Place::Finite)
        }
    }
}

impl Serialize for Place {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Place {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A logarithm of an absolute value or norm at one place.
///
/// Finite places keep the exact integer valuation `v` (value `-v ln p`);
/// the archimedean place keeps a float. `NegInfinity` is the log of zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogNorm {
    NegInfinity,
    Padic { prime: Prime, valuation: i64 },
    Real(f64),
}

impl LogNorm {
    pub fn value(&self) -> f64 {
        match *self {
            LogNorm::NegInfinity => f64::NEG_INFINITY,
            LogNorm::Padic { prime, valuation } => -(valuation as f64) * prime.ln(),
            LogNorm::Real(x) => x,
        }
    }

    /// `ln^+`: the value clamped below at zero.
    pub fn positive_part(&self) -> f64 {
        self.value().max(0.0)
    }

    /// Exact valuation for finite-place values.
    pub fn valuation(&self) -> Option<i64> {
        match *self {
            LogNorm::Padic { valuation, .. } => Some(valuation),
            _ => None,
        }
    }

    /// `ln^+` in units of `ln p` (finite places only): `max(0, -v)`.
    pub fn positive_units(&self) -> Option<i64> {
        match *self {
            LogNorm::NegInfinity => Some(0),
            LogNorm::Padic { valuation, .. } => Some((-valuation).max(0)),
            LogNorm::Real(_) => None,
        }
    }

    pub fn is_neg_infinity(&self) -> bool {
        matches!(self, LogNorm::NegInfinity)
    }
}

impl PartialOrd for LogNorm {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (
                LogNorm::Padic {
                    prime: p,
                    valuation: a,
                },
                LogNorm::Padic {
                    prime: q,
                    valuation: b,
                },
            ) if p == q => Some(b.cmp(a)),
            _ => self.value().partial_cmp(&other.value()),
        }
    }
}

pub(crate) fn valuation_int(n: &BigInt, p: Prime) -> i64 {
    debug_assert!(!n.is_zero());
    if p.get() == 2 {
        return n.trailing_zeros().unwrap_or(0) as i64;
    }
    let bp = p.to_bigint();
    let mut n = n.abs();
    let mut v = 0;
    loop {
        let (q, r) = num_integer::Integer::div_rem(&n, &bp);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

/// `p`-adic valuation: `q = p^v * a/b` with `p` dividing neither `a` nor `b`.
pub fn valuation(q: &Rational, p: Prime) -> Result<i64> {
    if q.is_zero() {
        return Err(Error::ZeroValuation);
    }
    Ok(valuation_int(q.numer(), p) - valuation_int(q.denom(), p))
}

/// `ln |q|_place`.
pub fn log_abs(q: &Rational, place: Place) -> LogNorm {
    if q.is_zero() {
        return LogNorm::NegInfinity;
    }
    match place {
        Place::Infinity => LogNorm::Real(ln_abs(q)),
        Place::Finite(prime) => LogNorm::Padic {
            prime,
            valuation: valuation(q, prime).expect("nonzero"),
        },
    }
}

/// Exact `|q|_place` as a rational (`p^{-v}` at a finite place).
pub fn abs_at(q: &Rational, place: Place) -> Rational {
    if q.is_zero() {
        return Rational::zero();
    }
    match place {
        Place::Infinity => q.abs(),
        Place::Finite(p) => {
            let v = valuation(q, p).expect("nonzero");
            let base = Rational::from_integer(p.to_bigint());
            num_traits::pow::Pow::pow(base, -v)
        }
    }
}
