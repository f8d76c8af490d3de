//! Run configuration shared by the pipeline stages and the CLI.

use serde::{Deserialize, Serialize};

use crate::clustering::DEFAULT_STOP_THRESHOLD;
use crate::corpus::DEFAULT_POPULARITY_THRESHOLDS;
use crate::inference::DEFAULT_PRIOR_P0;
use crate::training::{DEFAULT_ALPHA, DEFAULT_MIN_COUNT};
use crate::transitivity::RepairConfig;
use crate::{Error, Result};

/// Every knob of a pipeline run. Serializes losslessly to and from the
/// config file; all randomness (non-match sampling) flows from `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Additive smoothing constant for the ratio table.
    pub alpha: f64,
    /// Full-table count threshold below which r(x) backs off to the
    /// per-dimension product.
    pub min_count: u64,
    /// Transitivity slack for violation detection.
    pub delta: f64,
    /// Clustering stops when the best linkage probability falls below this.
    pub stop_threshold: f64,
    /// Repair passes per block.
    pub max_passes: u32,
    /// Weight multiplier for the smallest edge of a violating triplet from
    /// pass 2 onward.
    pub low_weight_factor: f64,
    /// Starting point of the per-block prior iteration.
    pub prior_p0: f64,
    /// Seed for non-match pair sampling.
    pub seed: u64,
    /// Block-size cutoffs for popularity bins 0/1/2.
    pub popularity_thresholds: (usize, usize),
    /// Worker threads; 0 means one per core.
    pub thread_count: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            alpha: DEFAULT_ALPHA,
            min_count: DEFAULT_MIN_COUNT,
            delta: 0.05,
            stop_threshold: DEFAULT_STOP_THRESHOLD,
            max_passes: 10,
            low_weight_factor: 0.5,
            prior_p0: DEFAULT_PRIOR_P0,
            seed: 42,
            popularity_thresholds: DEFAULT_POPULARITY_THRESHOLDS,
            thread_count: 0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(Error::DomainError(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        if self.min_count < 1 {
            return Err(Error::DomainError("min_count must be at least 1".into()));
        }
        if !(self.delta > 0.0) {
            return Err(Error::DomainError(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        if !(0.0..=1.0).contains(&self.stop_threshold) {
            return Err(Error::DomainError(format!(
                "stop_threshold must lie in [0, 1], got {}",
                self.stop_threshold
            )));
        }
        if self.max_passes < 1 {
            return Err(Error::DomainError("max_passes must be at least 1".into()));
        }
        if !(self.low_weight_factor > 0.0 && self.low_weight_factor <= 1.0) {
            return Err(Error::DomainError(format!(
                "low_weight_factor must lie in (0, 1], got {}",
                self.low_weight_factor
            )));
        }
        if !(self.prior_p0 > 0.0 && self.prior_p0 < 1.0) {
            return Err(Error::DomainError(format!(
                "prior_p0 must lie strictly between 0 and 1, got {}",
                self.prior_p0
            )));
        }
        if self.popularity_thresholds.0 > self.popularity_thresholds.1 {
            return Err(Error::DomainError(format!(
                "popularity thresholds must be ordered, got {:?}",
                self.popularity_thresholds
            )));
        }
        Ok(())
    }

    pub fn repair(&self) -> RepairConfig {
        RepairConfig {
            delta: self.delta,
            max_passes: self.max_passes,
            low_weight_factor: self.low_weight_factor,
        }
    }
}
