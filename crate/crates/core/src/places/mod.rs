//! Exact rational scalars, primes and places, per-place absolute values,
//! adelic heights and height-ball counting.

mod height;
mod logsum;
mod place;
mod prime;
pub mod rational;

pub use height::{
    adelic_height, count_height_ball, height_ball_profile, height_ball_radius_limit,
    HEIGHT_BALL_CAP,
};
pub use logsum::LogCombination;
pub use place::{abs_at, log_abs, valuation, LogNorm, Place};
pub use prime::{factor, is_prime, Prime};
pub use rational::{format_rational, parse_rational};
