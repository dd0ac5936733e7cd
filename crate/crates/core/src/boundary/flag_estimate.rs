use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact_matrix::to_real_scaled;
use crate::padic_linalg::{cartan_decompose, flag_canonicalize, Flag, ParabolicSpec};
use crate::places::rational::from_f64;
use crate::places::Place;
use crate::walk_engine::{
    estimate_lyapunov, lln_residual, sample_path_stream, LyapunovSpectrum, MeasureSpec, WalkPath,
};
use crate::{Rational, RationalMatrix};

/// Stream offset separating boundary paths from spectrum trials.
pub(crate) const BOUNDARY_STREAMS: u64 = 1 << 32;

/// Columns of `x` realising its singular directions in decreasing order:
/// at a finite place the `k1` columns of a Cartan decomposition, at infinity
/// `x r_k` for the right singular vectors `r_k` (rounded to rationals, so the
/// result stays exact and spans the top left singular spaces).
fn expanding_columns(x: &RationalMatrix, place: Place) -> Result<Vec<Vec<Rational>>> {
    let d = x.rows();
    match place {
        Place::Finite(p) => {
            let cd = cartan_decompose(x, p)?;
            Ok((0..d).map(|c| cd.k1.column(c)).collect())
        }
        Place::Infinity => {
            let (m, _) = to_real_scaled(x, None, None).ok_or(Error::Singular)?;
            let svd = m.svd(false, true);
            let v_t = svd.v_t.expect("requested");
            let mut order: Vec<usize> = (0..d).collect();
            order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
            order
                .into_iter()
                .map(|k| {
                    let r: Vec<Rational> = (0..d).map(|j| from_f64(v_t[(k, j)])).collect();
                    let col = RationalMatrix::from_columns(&[r])?;
                    Ok((x * &col).column(0))
                })
                .collect()
        }
    }
}

/// Estimated boundary flag `b(w)` at the spec's place from `x_n`: the span of
/// the `j_i` most expanded directions for each level `j_i` of the spec.
pub fn estimate_flag(path: &WalkPath, spec: &ParabolicSpec, n: usize) -> Result<Flag> {
    if n > path.len() {
        return Err(Error::OutOfRange {
            what: "n",
            detail: format!("{n} exceeds path length {}", path.len()),
        });
    }
    let x = path.product(n);
    if x.rows() != spec.dim() {
        return Err(Error::dims(spec.dim(), x.rows()));
    }
    if spec.is_trivial() {
        return Ok(Flag::trivial(spec.place(), spec.dim()));
    }
    let cols = expanding_columns(x, spec.place())?;
    let levels = spec
        .dims()
        .iter()
        .map(|&j| RationalMatrix::from_columns(&cols[..j]))
        .collect::<Result<Vec<_>>>()?;
    flag_canonicalize(&levels, spec.dims(), spec.place())
}

/// Spectra at every relevant place of `mu`.
pub fn relevant_spectra(
    mu: &MeasureSpec,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<LyapunovSpectrum>> {
    mu.relevant_places()?
        .places()
        .into_iter()
        .map(|place| estimate_lyapunov(mu, place, n, trials, seed))
        .collect()
}

/// The boundary flag at one place with its LLN residual.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlaceBoundary {
    pub place: Place,
    pub flag: Flag,
    /// `(1/n) d_place(x_n, b Λ_n)`, nats per step.
    pub residual: f64,
}

/// `b(w) = (b_p(w))_p` along one sampled path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryEstimate {
    pub seed: u64,
    pub n: usize,
    pub places: Vec<PlaceBoundary>,
}

impl BoundaryEstimate {
    pub fn flag(&self, place: Place) -> Option<&Flag> {
        self.places
            .iter()
            .find(|b| b.place == place)
            .map(|b| &b.flag)
    }
}

/// Sample one path and estimate its flag at every place covered by `spectra`
/// (which must include all relevant places of `mu`), merging exponents with
/// threshold `gap`.
pub fn boundary_point(
    mu: &MeasureSpec,
    spectra: &[LyapunovSpectrum],
    n: usize,
    seed: u64,
    gap: f64,
) -> Result<BoundaryEstimate> {
    let relevant = mu.relevant_places()?;
    for place in relevant.places() {
        if !spectra.iter().any(|s| s.place() == place) {
            return Err(Error::OutOfRange {
                what: "spectra",
                detail: format!("no spectrum for relevant place {place}"),
            });
        }
    }
    let path = sample_path_stream(mu, n, seed, BOUNDARY_STREAMS);
    let places = spectra
        .par_iter()
        .map(|s| {
            let spec = s.parabolic(gap);
            let flag = estimate_flag(&path, &spec, n)?;
            let residual = lln_residual(&path, &flag, &spec, n)?;
            Ok(PlaceBoundary {
                place: s.place(),
                flag,
                residual,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundaryEstimate { seed, n, places })
}
