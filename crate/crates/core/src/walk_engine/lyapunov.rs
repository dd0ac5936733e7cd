use num_traits::Zero;
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::Serialize;

use super::path::{product_of_steps, sample_steps, stream_rng};
use super::MeasureSpec;
use crate::error::{Error, Result};
use crate::exact_matrix::op_log_norm;
use crate::padic_linalg::ParabolicSpec;
use crate::places::rational::{ln_abs, to_f64};
use crate::places::{format_rational, valuation, Place};
use crate::{Rational, RationalMatrix};

/// Default block-merge threshold (nats per step).
pub const DEFAULT_GAP: f64 = 0.05;

/// Estimator knobs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LyapunovOptions {
    /// Restart the product every `block` steps and sum per-block log-norms.
    /// Bounds bit growth; the result over-estimates every partial sum except
    /// the last (an upper-bound estimator).
    pub block: Option<usize>,
}

/// Estimated exponents `λ̂_1 >= ... >= λ̂_d` at one place, in nats per step.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovSpectrum {
    place: Place,
    exponents: Vec<f64>,
    std_errors: Vec<f64>,
    /// Finite places: exponents as exact multiples of `ln p`.
    log_p_units: Option<Vec<Rational>>,
    n: usize,
    trials: usize,
    exact: bool,
}

impl LyapunovSpectrum {
    /// A spectrum known in closed form (zero standard errors).
    pub fn exact_at(place: Place, log_p_units: Vec<Rational>) -> Result<Self> {
        let p = place
            .prime()
            .ok_or_else(|| Error::PlaceMismatch("finite place".into(), place.to_string()))?;
        let mut units = log_p_units;
        units.sort_by(|a, b| b.cmp(a));
        Ok(Self {
            place,
            exponents: units.iter().map(|u| to_f64(u) * p.ln()).collect(),
            std_errors: vec![0.0; units.len()],
            log_p_units: Some(units),
            n: 0,
            trials: 0,
            exact: true,
        })
    }

    pub fn place(&self) -> Place {
        self.place
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    pub fn std_errors(&self) -> &[f64] {
        &self.std_errors
    }

    pub fn log_p_units(&self) -> Option<&[Rational]> {
        self.log_p_units.as_deref()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn trials(&self) -> usize {
        self.trials
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    /// `λ̂_1 - λ̂_d`.
    pub fn gap(&self) -> f64 {
        self.exponents[0] - self.exponents[self.dim() - 1]
    }

    /// Sum of all exponents.
    pub fn total(&self) -> f64 {
        match (&self.log_p_units, self.place.prime()) {
            (Some(u), Some(p)) => to_f64(&u.iter().sum::<Rational>()) * p.ln(),
            _ => self.exponents.iter().sum(),
        }
    }

    /// Multiplicity structure after merging exponents within `gap` nats of
    /// their block's leading exponent; each merged block is replaced by its mean (exactly, at finite
    /// places).
    pub fn parabolic(&self, gap: f64) -> ParabolicSpec {
        let ranges = merge_ranges(&self.exponents, gap);
        match (&self.log_p_units, self.place) {
            (Some(units), place @ Place::Finite(_)) => {
                let mut merged = Vec::with_capacity(units.len());
                for r in ranges {
                    let len = Rational::from_integer(r.len().into());
                    let mean = units[r.clone()].iter().sum::<Rational>() / len;
                    merged.extend(std::iter::repeat_n(mean, r.len()));
                }
                ParabolicSpec::from_log_p_units(place, merged).expect("descending")
            }
            (_, place) => {
                let mut merged = Vec::with_capacity(self.dim());
                for r in ranges {
                    let mean = self.exponents[r.clone()].iter().sum::<f64>() / r.len() as f64;
                    merged.extend(std::iter::repeat_n(mean, r.len()));
                }
                ParabolicSpec::from_exponents(place, merged).expect("descending")
            }
        }
    }
}

impl Serialize for LyapunovSpectrum {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("LyapunovSpectrum", 7)?;
        st.serialize_field("place", &self.place)?;
        st.serialize_field("exponents_nats_per_step", &self.exponents)?;
        st.serialize_field("std_errors_nats_per_step", &self.std_errors)?;
        st.serialize_field(
            "exponents_ln_p_units",
            &self
                .log_p_units
                .as_ref()
                .map(|u| u.iter().map(format_rational).collect::<Vec<_>>()),
        )?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("trials", &self.trials)?;
        st.serialize_field("exact", &self.exact)?;
        st.end()
    }
}

/// Split a descending sequence into runs lying within `gap` of the run's
/// first (largest) value. One run iff `values[0] - values[last] <= gap`.
pub(crate) fn merge_ranges(values: &[f64], gap: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..values.len() {
        if values[start] - values[i] > gap {
            out.push(start..i);
            start = i;
        }
    }
    out.push(start..values.len());
    out
}

/// Per-trial partial sums `ln ||∧^k x||` for `k = 1..d-1`.
enum Partial {
    Units(Vec<i64>),
    Nats(Vec<f64>),
}

fn partial_sums(x: &RationalMatrix, place: Place) -> Partial {
    let d = x.rows();
    let norms = (1..d).map(|k| op_log_norm(&x.exterior_power(k).expect("k <= d"), place));
    match place {
        Place::Finite(_) => Partial::Units(
            norms
                .map(|l| -l.valuation().expect("invertible product"))
                .collect(),
        ),
        Place::Infinity => Partial::Nats(norms.map(|l| l.value()).collect()),
    }
}

fn add_partials(acc: &mut Partial, other: Partial) {
    match (acc, other) {
        (Partial::Units(a), Partial::Units(b)) => a.iter_mut().zip(b).for_each(|(x, y)| *x += y),
        (Partial::Nats(a), Partial::Nats(b)) => a.iter_mut().zip(b).for_each(|(x, y)| *x += y),
        _ => unreachable!("same place"),
    }
}

fn trial_partials(
    mu: &MeasureSpec,
    place: Place,
    n: usize,
    seed: u64,
    t: u64,
    opts: &LyapunovOptions,
) -> Partial {
    let steps = sample_steps(mu, n, &mut stream_rng(seed, t));
    let block = opts.block.unwrap_or(n).max(1);
    let mut chunks = steps.chunks(block);
    let first = chunks.next().unwrap_or(&[]);
    let mut acc = partial_sums(&product_of_steps(mu, first), place);
    for chunk in chunks {
        add_partials(&mut acc, partial_sums(&product_of_steps(mu, chunk), place));
    }
    acc
}

/// `E_μ ln |det g|_p / ln p` exactly.
pub fn mean_log_det_units(mu: &MeasureSpec, place: Place) -> Option<Rational> {
    let p = place.prime()?;
    Some(
        mu.weights()
            .iter()
            .zip(mu.atoms())
            .map(|(w, a)| {
                let det = a.determinant().expect("square");
                w * Rational::from_integer((-valuation(&det, p).expect("invertible")).into())
            })
            .sum(),
    )
}

/// `E_μ ln |det g|_place` in nats.
pub fn mean_log_det(mu: &MeasureSpec, place: Place) -> f64 {
    match place {
        Place::Finite(p) => to_f64(&mean_log_det_units(mu, place).expect("finite")) * p.ln(),
        Place::Infinity => mu
            .weights()
            .iter()
            .zip(mu.atoms())
            .map(|(w, a)| to_f64(w) * ln_abs(&a.determinant().expect("square")))
            .sum(),
    }
}

pub fn estimate_lyapunov(
    mu: &MeasureSpec,
    place: Place,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<LyapunovSpectrum> {
    estimate_lyapunov_with(mu, place, n, trials, seed, &LyapunovOptions::default())
}

/// Monte Carlo estimate of the spectrum from `trials` independent paths of
/// length `n` (trial `t` uses stream `t`). The partial sums for `k < d` are
/// trial averages of `(1/n) ln ||∧^k x_n||`; the top sum `k = d` equals
/// `E_μ ln |det|` and is taken exactly from the atoms.
pub fn estimate_lyapunov_with(
    mu: &MeasureSpec,
    place: Place,
    n: usize,
    trials: usize,
    seed: u64,
    opts: &LyapunovOptions,
) -> Result<LyapunovSpectrum> {
    if n == 0 {
        return Err(Error::OutOfRange {
            what: "n",
            detail: "path length must be at least 1".into(),
        });
    }
    if trials == 0 {
        return Err(Error::OutOfRange {
            what: "trials",
            detail: "need at least one trial".into(),
        });
    }
    if opts.block == Some(0) {
        return Err(Error::OutOfRange {
            what: "block",
            detail: "restart length must be positive".into(),
        });
    }
    let d = mu.dim();
    let per_trial: Vec<Partial> = (0..trials as u64)
        .into_par_iter()
        .map(|t| trial_partials(mu, place, n, seed, t, opts))
        .collect();

    // Per-trial exponent vectors (unsorted), for standard errors.
    let nf = n as f64;
    let det_total = mean_log_det(mu, place);
    let trial_lambdas: Vec<Vec<f64>> = per_trial
        .iter()
        .map(|p| {
            let sums: Vec<f64> = match (p, place) {
                (Partial::Units(u), Place::Finite(q)) => {
                    u.iter().map(|&x| x as f64 * q.ln()).collect()
                }
                (Partial::Nats(v), _) => v.clone(),
                _ => unreachable!(),
            };
            differences(&sums, det_total * nf)
                .into_iter()
                .map(|x| x / nf)
                .collect()
        })
        .collect();

    let (mut exponents, log_p_units) = match place {
        Place::Finite(p) => {
            let mut totals = vec![0i128; d.saturating_sub(1)];
            for part in &per_trial {
                if let Partial::Units(u) = part {
                    totals.iter_mut().zip(u).for_each(|(a, &b)| *a += b as i128);
                }
            }
            let denom = Rational::from_integer((n as u64 * trials as u64).into());
            let means: Vec<Rational> = totals
                .iter()
                .map(|&s| Rational::from_integer(s.into()) / &denom)
                .collect();
            let top = mean_log_det_units(mu, place).expect("finite");
            let mut prev = Rational::zero();
            let mut units = Vec::with_capacity(d);
            for s in means.iter().chain(std::iter::once(&top)) {
                units.push(s - &prev);
                prev = s.clone();
            }
            let nats = units.iter().map(|u| to_f64(u) * p.ln()).collect::<Vec<_>>();
            (nats, Some(units))
        }
        Place::Infinity => {
            let mut totals = vec![0.0f64; d.saturating_sub(1)];
            for part in &per_trial {
                if let Partial::Nats(v) = part {
                    totals.iter_mut().zip(v).for_each(|(a, b)| *a += b);
                }
            }
            let means: Vec<f64> = totals.iter().map(|s| s / (nf * trials as f64)).collect();
            (differences(&means, det_total), None)
        }
    };

    let mut std_errors: Vec<f64> = (0..d)
        .map(|i| standard_error(trial_lambdas.iter().map(|l| l[i])))
        .collect();

    // Sort descending, carrying errors and exact units along.
    let mut order: Vec<usize> = (0..d).collect();
    match &log_p_units {
        Some(u) => order.sort_by(|&a, &b| u[b].cmp(&u[a])),
        None => order.sort_by(|&a, &b| exponents[b].total_cmp(&exponents[a])),
    }
    exponents = order.iter().map(|&i| exponents[i]).collect();
    std_errors = order.iter().map(|&i| std_errors[i]).collect();
    let log_p_units = log_p_units.map(|u| order.iter().map(|&i| u[i].clone()).collect::<Vec<_>>());
    debug_assert!(exponents.windows(2).all(|w| w[0] >= w[1]));

    Ok(LyapunovSpectrum {
        place,
        exponents,
        std_errors,
        log_p_units,
        n,
        trials,
        exact: place.is_finite() && mu.is_deterministic(),
    })
}

/// `[s_1, s_2 - s_1, ..., top - s_{d-1}]`.
fn differences(partial: &[f64], top: f64) -> Vec<f64> {
    let mut prev = 0.0;
    partial
        .iter()
        .chain(std::iter::once(&top))
        .map(|&s| {
            let out = s - prev;
            prev = s;
            out
        })
        .collect()
}

fn standard_error(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = xs.clone().count();
    if n < 2 {
        return 0.0;
    }
    let mean = xs.clone().sum::<f64>() / n as f64;
    let var = xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}
