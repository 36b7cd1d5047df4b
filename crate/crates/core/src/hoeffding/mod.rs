//! Incremental Hoeffding tree regressor.
//!
//! Leaves collect exact per-feature split statistics and try to split every
//! `grace_period` instances. The best and second-best candidate (best split
//! per feature, ranked by variance reduction) are compared through the merit
//! ratio `r = merit_2 / merit_1`, which lives in `[0, 1]`; the split is taken
//! when `1 - r` exceeds the Hoeffding bound for that range or when the bound
//! has shrunk below the tie threshold.

mod linear;
mod moments;
mod observer;
mod tree;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use linear::LinearModel;
pub use moments::Moments;
pub use observer::{variance_reduction, SplitCandidate, SplitObserver};
pub use tree::{HoeffdingTreeRegressor, LeafStats, SplitRecord, SNAPSHOT_VERSION};

#[derive(Debug, Error, PartialEq)]
pub enum TreeError {
    #[error("feature arity mismatch: tree expects {expected}, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("snapshot error: {0}")]
    Snapshot(String),
}

pub type Result<T> = std::result::Result<T, TreeError>;

/// `sqrt(R^2 ln(1/delta) / (2n))`.
pub fn hoeffding_epsilon(range: f64, delta: f64, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(TreeError::Domain("hoeffding bound needs n >= 1".into()));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(TreeError::Domain(format!(
            "delta must be in (0, 1], got {delta}"
        )));
    }
    Ok((range * range * (1.0 / delta).ln() / (2.0 * n as f64)).sqrt())
}

/// Growth and leaf-model parameters shared by every tree of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// Instances a leaf observes between split attempts.
    pub grace_period: u64,
    /// One minus the confidence of the split decision.
    pub delta: f64,
    /// Tie threshold below which a split is forced.
    pub tau: f64,
    /// Decay of the leaf-model selector's error trackers.
    pub decay: f64,
    pub max_depth: usize,
    /// Step size of the linear leaf model.
    pub learning_rate: f64,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            grace_period: 7,
            delta: 1e-7,
            tau: 0.5,
            decay: 0.2,
            max_depth: 20,
            learning_rate: 0.01,
        }
    }
}

impl TreeParams {
    /// Range of the merit ratio.
    pub const MERIT_RANGE: f64 = 1.0;

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(TreeError::Domain(format!(
                "delta must be in (0, 1), got {}",
                self.delta
            )));
        }
        if !(self.tau >= 0.0) {
            return Err(TreeError::Domain(format!(
                "tau must be >= 0, got {}",
                self.tau
            )));
        }
        if self.grace_period == 0 {
            return Err(TreeError::Domain("grace_period must be >= 1".into()));
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return Err(TreeError::Domain(format!(
                "decay must be in (0, 1], got {}",
                self.decay
            )));
        }
        if !(self.learning_rate > 0.0) {
            return Err(TreeError::Domain("learning_rate must be positive".into()));
        }
        Ok(())
    }
}
