use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scoring::QuantileLevel;

/// Gradient-based one-side sampling fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GossConfig {
    /// Share of samples with the largest |gradient| that are always kept.
    pub top_fraction: f64,
    /// Share of samples drawn at random from the rest.
    pub rest_fraction: f64,
}

impl GossConfig {
    pub fn validate(&self) -> Result<()> {
        let (a, b) = (self.top_fraction, self.rest_fraction);
        if !(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "GOSS fractions ({a}, {b}) must lie in (0, 1)"
            )));
        }
        if a + b > 1.0 {
            return Err(Error::InvalidArgument(format!(
                "GOSS fractions sum to {} > 1",
                a + b
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbdtConfig {
    pub tau: QuantileLevel,
    pub max_depth: usize,
    pub min_data_in_leaf: usize,
    pub learning_rate: f64,
    pub num_iterations: usize,
    pub num_leaves: usize,
    pub early_stopping_round: usize,
    pub n_bins: usize,
    pub goss: Option<GossConfig>,
    pub seed: u64,
}

pub const DEFAULT_BINS: usize = 255;

impl GbdtConfig {
    /// Library-style defaults at quantile level `tau`.
    pub fn new(tau: QuantileLevel) -> Self {
        GbdtConfig {
            tau,
            max_depth: 6,
            min_data_in_leaf: 20,
            learning_rate: 0.1,
            num_iterations: 100,
            num_leaves: 31,
            early_stopping_round: 0,
            n_bins: DEFAULT_BINS,
            goss: None,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.max_depth == 0 || self.min_data_in_leaf == 0 || self.num_iterations == 0 {
            return bad("max_depth, min_data_in_leaf and num_iterations must be positive".into());
        }
        if self.num_leaves < 2 {
            return bad(format!(
                "num_leaves = {} must be at least 2",
                self.num_leaves
            ));
        }
        if self.max_depth < usize::BITS as usize - 1 && self.num_leaves > 1usize << self.max_depth {
            return bad(format!(
                "num_leaves = {} exceeds 2^max_depth = {}",
                self.num_leaves,
                1usize << self.max_depth
            ));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad(format!(
                "learning_rate {} must be positive",
                self.learning_rate
            ));
        }
        if self.n_bins < 2 || self.n_bins > usize::from(u16::MAX) {
            return bad(format!("n_bins = {} out of range", self.n_bins));
        }
        if let Some(g) = &self.goss {
            g.validate()?;
        }
        Ok(())
    }
}
