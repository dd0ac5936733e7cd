use std::collections::HashMap;

use num_traits::One;

use super::MeasureSpec;
use crate::error::{Error, Result};
use crate::places::LogCombination;
use crate::{Rational, RationalMatrix};

/// Largest support `exact_convolution_entropy` will enumerate.
pub const SUPPORT_CAP: usize = 1_000_000;

/// Shannon entropy of `μ^{*n}` as an exact combination of logarithms.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionEntropy {
    pub n: usize,
    pub support_size: usize,
    /// `-sum q ln q`.
    pub exact: LogCombination,
}

impl ConvolutionEntropy {
    pub fn nats(&self) -> f64 {
        self.exact.to_f64()
    }
}

/// The law of `x_n`, enumerated step by step with exact dedup.
pub fn convolution_power(mu: &MeasureSpec, n: usize) -> Result<HashMap<RationalMatrix, Rational>> {
    convolution_power_capped(mu, n, SUPPORT_CAP)
}

pub(crate) fn convolution_power_capped(
    mu: &MeasureSpec,
    n: usize,
    cap: usize,
) -> Result<HashMap<RationalMatrix, Rational>> {
    let mut seq = ConvolutionSequence::with_cap(mu, cap);
    for _ in 0..n {
        seq.advance()?;
    }
    Ok(seq.law)
}

/// The laws `μ^{*0}, μ^{*1}, ...` in turn, so a sweep over `n` convolves once per step.
#[derive(Debug, Clone)]
pub struct ConvolutionSequence<'a> {
    mu: &'a MeasureSpec,
    law: HashMap<RationalMatrix, Rational>,
    n: usize,
    cap: usize,
}

impl<'a> ConvolutionSequence<'a> {
    /// Starts at `μ^{*0} = δ_1` with the default [`SUPPORT_CAP`].
    pub fn new(mu: &'a MeasureSpec) -> Self {
        Self::with_cap(mu, SUPPORT_CAP)
    }

    pub fn with_cap(mu: &'a MeasureSpec, cap: usize) -> Self {
        Self {
            mu,
            law: HashMap::from([(RationalMatrix::identity(mu.dim()), Rational::one())]),
            n: 0,
            cap,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn law(&self) -> &HashMap<RationalMatrix, Rational> {
        &self.law
    }

    /// Convolve once more. On a budget error the sequence is left unchanged.
    pub fn advance(&mut self) -> Result<()> {
        let step = self.n + 1;
        let mut next: HashMap<RationalMatrix, Rational> =
            HashMap::with_capacity(self.law.len() * self.mu.len());
        for (g, q) in &self.law {
            for (w, a) in self.mu.weights().iter().zip(self.mu.atoms()) {
                *next.entry(g * a).or_default() += q * w;
                if next.len() > self.cap {
                    return Err(Error::Budget {
                        detail: format!(
                            "support of the step-{step} convolution reached {} atoms (cap {})",
                            next.len(),
                            self.cap
                        ),
                    });
                }
            }
        }
        self.law = next;
        self.n = step;
        Ok(())
    }

    /// Entropy of the current law.
    pub fn entropy(&self) -> ConvolutionEntropy {
        // Many atoms share a probability; factor each distinct value once.
        let mut multiplicity: HashMap<&Rational, u64> = HashMap::new();
        for q in self.law.values() {
            *multiplicity.entry(q).or_default() += 1;
        }
        let mut values: Vec<_> = multiplicity.into_iter().collect();
        values.sort();
        let mut exact = LogCombination::zero();
        for (q, count) in values {
            let weight = -(q * Rational::from_integer(count.into()));
            exact.add(&LogCombination::ln_abs(q).scaled(&weight));
        }
        ConvolutionEntropy {
            n: self.n,
            support_size: self.law.len(),
            exact,
        }
    }
}

pub fn exact_convolution_entropy(mu: &MeasureSpec, n: usize) -> Result<ConvolutionEntropy> {
    entropy_capped(mu, n, SUPPORT_CAP)
}

pub(crate) fn entropy_capped(mu: &MeasureSpec, n: usize, cap: usize) -> Result<ConvolutionEntropy> {
    if n == 0 {
        return Err(Error::OutOfRange {
            what: "n",
            detail: "must be at least 1".into(),
        });
    }
    let mut seq = ConvolutionSequence::with_cap(mu, cap);
    for _ in 0..n {
        seq.advance()?;
    }
    Ok(seq.entropy())
}
