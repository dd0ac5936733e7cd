//! Parsing, formatting and floating-point views of exact rationals.

use num_bigint::{BigInt, Sign};
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::Rational;

/// Parse `"a/b"` or `"a"`: optional leading minus, decimal digits, positive
/// denominator, no whitespace.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = |msg: &str| Error::parse(format!("{s:?}"), msg.to_string());
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a, Some(b)),
        None => (s, None),
    };
    let digits = num.strip_prefix('-').unwrap_or(num);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad("expected an integer numerator"));
    }
    let n: BigInt = num.parse().map_err(|_| bad("bad numerator"))?;
    let d: BigInt = match den {
        None => BigInt::from(1),
        Some(den) => {
            if den.is_empty() || !den.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad("expected a positive integer denominator"));
            }
            den.parse().map_err(|_| bad("bad denominator"))?
        }
    };
    if d.is_zero() {
        return Err(bad("zero denominator"));
    }
    Ok(Rational::new(n, d))
}

/// `"a/b"`, or `"a"` when the denominator is one.
pub fn format_rational(q: &Rational) -> String {
    if q.denom() == &BigInt::from(1) {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Panicking parser for literals in tests.
#[cfg(test)]
pub(crate) fn q(s: &str) -> Rational {
    parse_rational(s).unwrap()
}

/// `(m, e)` with `|n| = m * 2^e` up to f64 rounding, `m` holding the top 64 bits.
fn split_bigint(n: &BigInt) -> (f64, i64) {
    let bits = n.bits();
    if bits <= 64 {
        (n.abs().to_f64().unwrap_or(0.0), 0)
    } else {
        let shift = bits - 64;
        let top: BigInt = n.abs() >> shift;
        (top.to_f64().unwrap_or(0.0), shift as i64)
    }
}

/// Sign, mantissa and binary exponent: `q = sign * mantissa * 2^exponent`
/// with `mantissa` in `[1, 2)`, or `(0, 0.0, 0)` for zero.
pub fn to_scaled(q: &Rational) -> (i8, f64, i64) {
    if q.is_zero() {
        return (0, 0.0, 0);
    }
    let sign = if q.numer().sign() == Sign::Minus {
        -1
    } else {
        1
    };
    let (mn, en) = split_bigint(q.numer());
    let (md, ed) = split_bigint(q.denom());
    let ratio = mn / md;
    let adj = ratio.log2().floor();
    let mantissa = ratio / 2f64.powf(adj);
    (sign, mantissa, en - ed + adj as i64)
}

/// `ln |q|`, accurate for rationals far outside the f64 range; `-inf` at zero.
pub fn ln_abs(q: &Rational) -> f64 {
    let (sign, mantissa, exp) = to_scaled(q);
    if sign == 0 {
        return f64::NEG_INFINITY;
    }
    mantissa.ln() + exp as f64 * std::f64::consts::LN_2
}

/// Floating value, saturating to ±inf / 0 outside the f64 range.
pub fn to_f64(q: &Rational) -> f64 {
    let (sign, mantissa, exp) = to_scaled(q);
    if sign == 0 {
        return 0.0;
    }
    let e = exp.clamp(-2000, 2000) as i32;
    sign as f64 * mantissa * 2f64.powi(e)
}

/// Exact rational value of a finite float.
pub fn from_f64(x: f64) -> Rational {
    Rational::from_float(x).unwrap_or_else(Rational::zero)
}
