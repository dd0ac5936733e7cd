//! Exact matrix algebra over the rationals and per-place norms: operator
//! log-norms, the pseudometrics `d_p` and `d`, and relevant-place detection.

mod matrix;
mod norms;

pub use matrix::Matrix;
pub use norms::{
    adelic_dist, dp_dist, dp_dist_units, log_spectral_norm, matrix_from_strings, matrix_to_strings,
    op_log_norm, relevant_places, to_real_scaled, PlaceSet,
};
