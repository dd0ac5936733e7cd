use std::collections::BTreeMap;

use num_integer::Integer as _;
use num_traits::{Pow, Zero};
use rayon::prelude::*;

use super::flag_estimate::{estimate_flag, BOUNDARY_STREAMS};
use crate::error::{Error, Result};
use crate::padic_linalg::{flag_distance, Flag, ParabolicSpec};
use crate::places::{valuation, Place};
use crate::walk_engine::{sample_steps, stream_rng, MeasureSpec, WalkPath};
use crate::{Integer, Rational, RationalMatrix};

const STATIONARITY_STREAMS: u64 = 2 * BOUNDARY_STREAMS;
const CONTRACTION_STREAMS: u64 = 3 * BOUNDARY_STREAMS;

/// Coarse cell of one echelon entry. `None` is the overflow cell.
type Cell = Option<Integer>;

fn cell(q: &Rational, place: Place, depth: u32) -> Cell {
    match place {
        Place::Finite(p) => {
            // Image of q in p^-depth Z_p / p^depth Z_p, as (q p^depth) mod p^(2 depth).
            if q.is_zero() {
                return Some(Integer::from(0));
            }
            if valuation(q, p).expect("nonzero") < -(depth as i64) {
                return None;
            }
            let pd: Integer = Pow::pow(p.to_bigint(), depth);
            let modulus = &pd * &pd;
            let shifted = q * Rational::from_integer(pd);
            let den_inv = shifted.denom().extended_gcd(&modulus).x.mod_floor(&modulus);
            Some((shifted.numer() * den_inv).mod_floor(&modulus))
        }
        Place::Infinity => {
            let scale = Rational::from_integer(Integer::from(1) << depth);
            let limit = Integer::from(1) << (2 * depth);
            let k = (q * scale).floor().to_integer();
            Some(k.clamp(-limit.clone(), limit))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Bucket {
    pivots: Vec<Vec<usize>>,
    cells: Vec<Cell>,
}

fn bucket(flag: &Flag, depth: u32) -> Bucket {
    Bucket {
        pivots: flag.pivots().to_vec(),
        cells: flag
            .subspaces()
            .iter()
            .flat_map(|m| m.entries())
            .map(|q| cell(q, flag.place(), depth))
            .collect(),
    }
}

/// Total-variation distance between the empirical bucket laws of two samples.
pub fn bucket_tv(a: &[Flag], b: &[Flag], depth: u32) -> f64 {
    let mut counts: BTreeMap<Bucket, (usize, usize)> = BTreeMap::new();
    for f in a {
        counts.entry(bucket(f, depth)).or_default().0 += 1;
    }
    for f in b {
        counts.entry(bucket(f, depth)).or_default().1 += 1;
    }
    let (na, nb) = (a.len().max(1) as f64, b.len().max(1) as f64);
    0.5 * counts
        .values()
        .map(|&(x, y)| (x as f64 / na - y as f64 / nb).abs())
        .sum::<f64>()
}

/// Draws flags `b_j` from `samples` independent paths of length `n` and
/// compares the law of `b_j` with that of `g_j b_j` (`g_j ~ μ` independent):
/// the total-variation distance between the two bucketed empirical laws.
pub fn stationarity_defect(
    mu: &MeasureSpec,
    spec: &ParabolicSpec,
    samples: usize,
    n: usize,
    depth: u32,
    seed: u64,
) -> Result<f64> {
    if samples < 100 {
        return Err(Error::OutOfRange {
            what: "samples",
            detail: format!("{samples} < 100"),
        });
    }
    if spec.is_trivial() {
        return Ok(0.0);
    }
    let pairs = (0..samples as u64)
        .into_par_iter()
        .map(|j| {
            let mut rng = stream_rng(seed, STATIONARITY_STREAMS + j);
            let steps = sample_steps(mu, n, &mut rng);
            let g = mu.atom(sample_steps(mu, 1, &mut rng)[0]);
            let path = WalkPath::from_steps(mu, seed, STATIONARITY_STREAMS + j, steps);
            let b = estimate_flag(&path, spec, n)?;
            let pushed = b.act(g)?;
            Ok((b, pushed))
        })
        .collect::<Result<Vec<_>>>()?;
    let (base, pushed): (Vec<Flag>, Vec<Flag>) = pairs.into_iter().unzip();
    Ok(bucket_tv(&base, &pushed, depth))
}

/// Largest pairwise [`flag_distance`] among `x b_j`.
pub fn contraction_diameter_of(x: &RationalMatrix, flags: &[Flag]) -> Result<f64> {
    let moved = flags.iter().map(|f| f.act(x)).collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0f64;
    for (i, a) in moved.iter().enumerate() {
        for b in &moved[i + 1..] {
            worst = worst.max(flag_distance(a, b)?);
        }
    }
    Ok(worst)
}

/// Diameter of `x_n {b_1, ..., b_samples}`, the `b_j` estimated from
/// auxiliary paths independent of the common path `x_n`.
pub fn contraction_diameter(
    mu: &MeasureSpec,
    spec: &ParabolicSpec,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if samples < 2 {
        return Err(Error::OutOfRange {
            what: "samples",
            detail: format!("{samples} < 2"),
        });
    }
    if spec.is_trivial() {
        return Ok(0.0);
    }
    let path_for = |stream: u64| {
        let steps = sample_steps(mu, n, &mut stream_rng(seed, stream));
        WalkPath::from_steps(mu, seed, stream, steps)
    };
    let common = path_for(CONTRACTION_STREAMS);
    let flags = (1..=samples as u64)
        .into_par_iter()
        .map(|j| estimate_flag(&path_for(CONTRACTION_STREAMS + j), spec, n))
        .collect::<Result<Vec<_>>>()?;
    contraction_diameter_of(common.product(n), &flags)
}
