use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer as _;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A primality-checked prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Self> {
        if is_prime(p) {
            Ok(Prime(p))
        } else {
            Err(Error::NotPrime(p))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn ln(self) -> f64 {
        (self.0 as f64).ln()
    }

    pub fn to_bigint(self) -> BigInt {
        BigInt::from(self.0)
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for Prime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let p: u64 = s
            .parse()
            .map_err(|_| Error::parse(format!("{s:?}"), "expected a prime"))?;
        Prime::new(p)
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_rho(n: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = x.abs_diff(y).gcd(&n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

fn factor_u64(n: u64, out: &mut Vec<BigUint>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(BigUint::from(n));
        return;
    }
    let d = pollard_rho(n);
    factor_u64(d, out);
    factor_u64(n / d, out);
}

const TRIAL_LIMIT: u64 = 1 << 16;

/// Factorization `n = prod base^exp` with bases ascending. Bases are prime
/// except possibly one trailing cofactor wider than 64 bits that survived
/// trial division.
pub fn factor(n: &BigUint) -> Vec<(BigUint, u32)> {
    let mut rest = n.clone();
    let mut found: Vec<BigUint> = Vec::new();
    if rest.is_zero() {
        return Vec::new();
    }
    let mut p = 2u64;
    while p < TRIAL_LIMIT && !rest.is_one() {
        if rest.to_u64().is_some() {
            break;
        }
        let bp = BigUint::from(p);
        while (&rest % &bp).is_zero() {
            rest /= &bp;
            found.push(bp.clone());
        }
        p += if p == 2 { 1 } else { 2 };
    }
    match rest.to_u64() {
        Some(small) => factor_u64(small, &mut found),
        None => found.push(rest),
    }
    found.sort();
    let mut out: Vec<(BigUint, u32)> = Vec::new();
    for f in found {
        match out.last_mut() {
            Some((b, e)) if *b == f => *e += 1,
            _ => out.push((f, 1)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality() {
        let small: Vec<u64> = (0..50).filter(|&n| is_prime(n)).collect();
        assert_eq!(
            small,
            vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]
        );
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(1_000_000_007 * 3));
        assert!(is_prime(18_446_744_073_709_551_557));
        assert_eq!(Prime::new(4), Err(Error::NotPrime(4)));
        assert_eq!("7".parse::<Prime>().unwrap().get(), 7);
    }

    #[test]
    fn factor_matches_product() {
        for n in [
            1u64,
            2,
            12,
            360,
            97 * 89,
            600_851_475_143,
            1_000_000_007 * 998_244_353,
        ] {
            let f = factor(&BigUint::from(n));
            let back: BigUint = f.iter().map(|(b, e)| b.pow(*e)).product();
            assert_eq!(back, BigUint::from(n));
            assert!(f.iter().all(|(b, _)| is_prime(b.to_u64().unwrap())));
        }
        let big = BigUint::from(2u32).pow(100) * BigUint::from(3u32).pow(7);
        assert_eq!(
            factor(&big),
            vec![(BigUint::from(2u32), 100), (BigUint::from(3u32), 7)]
        );
    }
}
