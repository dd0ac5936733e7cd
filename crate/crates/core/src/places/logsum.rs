use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{Signed, ToPrimitive, Zero};

use super::prime::factor;
use super::rational::ln_abs;
use crate::Rational;

/// An exact real of the form `sum c_b ln b` with rational coefficients and
/// integer bases (primes, barring unfactored wide cofactors).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LogCombination {
    terms: BTreeMap<BigUint, Rational>,
}

impl LogCombination {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `ln |q|` for nonzero `q`, expanded over the prime factorization.
    pub fn ln_abs(q: &Rational) -> Self {
        assert!(!q.is_zero(), "ln of zero");
        let mut out = Self::zero();
        let num = q.numer().abs().to_biguint().expect("nonnegative");
        for (b, e) in factor(&num) {
            out.add_term(b, Rational::from_integer(e.into()));
        }
        for (b, e) in factor(&q.denom().to_biguint().expect("positive")) {
            out.add_term(b, -Rational::from_integer(e.into()));
        }
        out
    }

    /// `coefficient * ln base`.
    pub fn term(base: u64, coefficient: Rational) -> Self {
        let mut out = Self::zero();
        out.add_term(BigUint::from(base), coefficient);
        out
    }

    fn add_term(&mut self, base: BigUint, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self
            .terms
            .entry(base.clone())
            .or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&base);
        }
    }

    pub fn add(&mut self, other: &Self) {
        for (b, c) in &other.terms {
            self.add_term(b.clone(), c.clone());
        }
    }

    pub fn scaled(&self, s: &Rational) -> Self {
        let mut out = Self::zero();
        for (b, c) in &self.terms {
            out.add_term(b.clone(), c * s);
        }
        out
    }

    pub fn negated(&self) -> Self {
        self.scaled(&-Rational::from_integer(1.into()))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, base: u64) -> Rational {
        self.terms
            .get(&BigUint::from(base))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BigUint, &Rational)> {
        self.terms.iter()
    }

    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(b, c)| {
                let lnb = match b.to_u64() {
                    Some(small) => (small as f64).ln(),
                    None => ln_abs(&Rational::from_integer(b.clone().into())),
                };
                super::rational::to_f64(c) * lnb
            })
            .sum()
    }
}

impl fmt::Display for LogCombination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(b, c)| format!("{}*ln({b})", super::rational::format_rational(c)))
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::places::rational::q;

    #[test]
    fn ln_of_rationals() {
        let l = LogCombination::ln_abs(&q("3/4"));
        assert_eq!(l.coefficient(2), q("-2"));
        assert_eq!(l.coefficient(3), q("1"));
        assert!((l.to_f64() - 0.75f64.ln()).abs() < 1e-15);
        assert!(LogCombination::ln_abs(&q("-1")).is_zero());
    }

    #[test]
    fn cancellation_is_exact() {
        let mut a = LogCombination::ln_abs(&q("6"));
        a.add(&LogCombination::ln_abs(&q("1/6")));
        assert!(a.is_zero());
        assert_eq!(a.to_string(), "0");
    }
}
