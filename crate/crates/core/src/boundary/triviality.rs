use serde::Serialize;

use crate::places::Place;
use crate::walk_engine::LyapunovSpectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Trivial,
    Nontrivial,
    Inconclusive,
}

/// Per-place summary behind a [`Verdict`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlaceTriviality {
    pub place: Place,
    pub exponents_nats_per_step: Vec<f64>,
    pub std_errors_nats_per_step: Vec<f64>,
    /// `λ̂_1 - λ̂_d`, nats per step.
    pub gap_nats_per_step: f64,
    /// `SE(λ̂_1) + SE(λ̂_d)`.
    pub gap_std_error: f64,
    /// Flag dimensions after merging with the report's threshold.
    pub block_dims: Vec<usize>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrivialityReport {
    pub gap_threshold: f64,
    pub places: Vec<PlaceTriviality>,
    /// Nontriviality under irreducibility hypotheses is not decided.
    pub converse: &'static str,
}

impl TrivialityReport {
    pub fn verdict(&self, place: Place) -> Option<Verdict> {
        self.places
            .iter()
            .find(|p| p.place == place)
            .map(|p| p.verdict)
    }

    pub fn nontrivial_places(&self) -> Vec<Place> {
        self.places
            .iter()
            .filter(|p| p.verdict == Verdict::Nontrivial)
            .map(|p| p.place)
            .collect()
    }
}

/// Trivial iff `λ̂_1 - λ̂_d <= gap` (equivalently: one merged block);
/// nontrivial once the gap exceeds the threshold by two standard errors;
/// inconclusive in between.
pub fn triviality_report(spectra: &[LyapunovSpectrum], gap: f64) -> TrivialityReport {
    let places = spectra
        .iter()
        .map(|s| {
            let d = s.dim();
            let spread = s.gap();
            let se = s.std_errors()[0] + s.std_errors()[d - 1];
            let block_dims = s.parabolic(gap).dims().to_vec();
            let verdict = if spread <= gap {
                Verdict::Trivial
            } else if spread - 2.0 * se > gap {
                Verdict::Nontrivial
            } else {
                Verdict::Inconclusive
            };
            debug_assert_eq!(verdict == Verdict::Trivial, block_dims.len() == 1);
            PlaceTriviality {
                place: s.place(),
                exponents_nats_per_step: s.exponents().to_vec(),
                std_errors_nats_per_step: s.std_errors().to_vec(),
                gap_nats_per_step: spread,
                gap_std_error: se,
                block_dims,
                verdict,
            }
        })
        .collect();
    TrivialityReport {
        gap_threshold: gap,
        places,
        converse: "not checked - see docs",
    }
}
