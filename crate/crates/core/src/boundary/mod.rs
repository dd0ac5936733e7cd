//! Boundary flags per place, μ-boundary diagnostics and triviality.

mod diagnostics;
mod flag_estimate;
mod triviality;

pub use diagnostics::{
    bucket_tv, contraction_diameter, contraction_diameter_of, stationarity_defect,
};
pub use flag_estimate::{
    boundary_point, estimate_flag, relevant_spectra, BoundaryEstimate, PlaceBoundary,
};
pub use triviality::{triviality_report, PlaceTriviality, TrivialityReport, Verdict};

#[cfg(test)]
mod tests;
