use num_traits::{Signed, Zero};

use super::rational::ln_abs;
use crate::error::{Error, Result};
use crate::Rational;

/// Largest `max(|a|, b)` the height-ball count will enumerate.
pub const HEIGHT_BALL_CAP: u64 = 1_000_000;

/// Largest radius accepted by [`count_height_ball`].
pub fn height_ball_radius_limit() -> f64 {
    (HEIGHT_BALL_CAP as f64).ln()
}

/// `sum over all places of ln^+ |q|_place`.
///
/// For `q = a/b` reduced, the archimedean term is `ln^+(|a|/b)` and the primes
/// dividing `b` contribute exactly `ln b`, so the sum is `ln max(|a|, b)`.
pub fn adelic_height(q: &Rational) -> Result<f64> {
    if q.is_zero() {
        return Err(Error::ZeroValuation);
    }
    let a = Rational::from_integer(q.numer().abs());
    let b = Rational::from_integer(q.denom().clone());
    Ok(ln_abs(&a).max(ln_abs(&b)))
}

/// Largest integer `m >= 1` with `ln m <= radius` (up to a relative 1e-12 slack
/// so radii given as `ln m` in floating point still include `m`).
fn height_bound(radius: f64) -> u64 {
    let slack = 1e-12 * radius.max(1.0);
    let fits = |m: u64| (m as f64).ln() <= radius + slack;
    let mut m = radius.exp().floor().max(1.0) as u64;
    while m > 1 && !fits(m) {
        m -= 1;
    }
    while fits(m + 1) {
        m += 1;
    }
    m
}

fn check_radius(radius: f64) -> Result<()> {
    if radius.is_nan() || radius < 0.0 {
        return Err(Error::OutOfRange {
            what: "height radius",
            detail: format!("{radius} must be >= 0"),
        });
    }
    if radius > height_ball_radius_limit() + 1e-9 {
        return Err(Error::Budget {
            detail: format!(
                "radius {radius} needs max(|a|, b) beyond the enumeration cap {HEIGHT_BALL_CAP} (radius <= {:.6})",
                height_ball_radius_limit()
            ),
        });
    }
    Ok(())
}

fn totients(n: usize) -> Vec<u64> {
    let mut phi: Vec<u64> = (0..=n as u64).collect();
    for i in 2..=n {
        if phi[i] == i as u64 {
            for j in (i..=n).step_by(i) {
                phi[j] -= phi[j] / i as u64;
            }
        }
    }
    phi
}

/// Number of nonzero rationals of adelic height at most `radius`.
///
/// These are the reduced fractions `±a/b` with `1 <= a, b <= N`, `N` the
/// largest integer with `ln N <= radius`; coprime pairs in `[1, N]^2` are
/// counted through a totient sieve (`2 * sum phi(k) - 1`).
pub fn count_height_ball(radius: f64) -> Result<u64> {
    check_radius(radius)?;
    let n = height_bound(radius).min(HEIGHT_BALL_CAP) as usize;
    let coprime_pairs = 2 * totients(n)[1..].iter().sum::<u64>() - 1;
    Ok(2 * coprime_pairs)
}

/// Counts at every radius where the ball grows, up to `rmax`: pairs
/// `(m, count_height_ball(ln m))` for `m = 1, 2, ..`, from a single sieve.
pub fn height_ball_profile(rmax: f64) -> Result<Vec<(u64, u64)>> {
    check_radius(rmax)?;
    let n = height_bound(rmax).min(HEIGHT_BALL_CAP) as usize;
    let phi = totients(n);
    let mut running = 0u64;
    Ok((1..=n)
        .map(|m| {
            running += phi[m];
            (m as u64, 2 * (2 * running - 1))
        })
        .collect())
}
