//! Measures, seeded walks, Lyapunov spectra, `Λ_n`, LLN residuals and
//! convolution entropy.

pub mod catalog;
mod entropy;
mod lln;
mod lyapunov;
mod measure;
mod path;

pub use entropy::{
    convolution_power, exact_convolution_entropy, ConvolutionEntropy, ConvolutionSequence,
    SUPPORT_CAP,
};
pub use lln::{lambda_matrix, lln_residual, lln_residual_for_basis, LambdaMatrix};
pub use lyapunov::{
    estimate_lyapunov, estimate_lyapunov_with, mean_log_det, mean_log_det_units, LyapunovOptions,
    LyapunovSpectrum, DEFAULT_GAP,
};
pub use measure::{load_measure, MeasureSpec};
pub use path::{
    product_of_steps, sample_path, sample_path_stream, sample_steps, stream_rng, WalkPath, RNG_NAME,
};
