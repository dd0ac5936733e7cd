use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::MeasureSpec;
use crate::RationalMatrix;

/// Name and version of the path generator, recorded in run manifests.
pub const RNG_NAME: &str = "chacha8-stream-v1";

/// Stream `stream` of the generator keyed by `seed`. Distinct streams are
/// independent; each is reproducible on its own.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `n` i.i.d. atom indices drawn from `rng`.
pub fn sample_steps(mu: &MeasureSpec, n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    if mu.is_deterministic() {
        return vec![0; n];
    }
    let dist = WeightedIndex::new(mu.integer_weights()).expect("validated weights");
    (0..n).map(|_| dist.sample(rng)).collect()
}

/// `w_1 ... w_n` without keeping the intermediate products.
pub fn product_of_steps(mu: &MeasureSpec, steps: &[usize]) -> RationalMatrix {
    steps
        .iter()
        .fold(RationalMatrix::identity(mu.dim()), |x, &i| &x * mu.atom(i))
}

/// A sampled walk: atom indices and the exact partial products
/// `x_0 = e`, `x_k = x_{k-1} w_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkPath {
    seed: u64,
    stream: u64,
    steps: Vec<usize>,
    products: Vec<RationalMatrix>,
}

impl WalkPath {
    pub fn from_steps(mu: &MeasureSpec, seed: u64, stream: u64, steps: Vec<usize>) -> Self {
        let mut products = Vec::with_capacity(steps.len() + 1);
        products.push(RationalMatrix::identity(mu.dim()));
        for &i in &steps {
            let next = products.last().expect("nonempty") * mu.atom(i);
            products.push(next);
        }
        Self {
            seed,
            stream,
            steps,
            products,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[usize] {
        &self.steps
    }

    /// `x_k`.
    pub fn product(&self, k: usize) -> &RationalMatrix {
        &self.products[k]
    }

    pub fn products(&self) -> &[RationalMatrix] {
        &self.products
    }

    /// The shifted path `(w_2, w_3, ...)`.
    pub fn shifted(&self, mu: &MeasureSpec) -> WalkPath {
        Self::from_steps(
            mu,
            self.seed,
            self.stream,
            self.steps[1.min(self.len())..].to_vec(),
        )
    }
}

/// Path of length `n` from stream 0 of `seed`.
pub fn sample_path(mu: &MeasureSpec, n: usize, seed: u64) -> WalkPath {
    sample_path_stream(mu, n, seed, 0)
}

pub fn sample_path_stream(mu: &MeasureSpec, n: usize, seed: u64, stream: u64) -> WalkPath {
    let steps = sample_steps(mu, n, &mut stream_rng(seed, stream));
    WalkPath::from_steps(mu, seed, stream, steps)
}
