//! Estimators and hypothesis tests for the limit laws of both models.
//!
//! Most tests consume an [`Ensemble`] of independently simulated
//! trajectories. Return probability and range estimation need their own,
//! much larger, sets of short walks and therefore drive the simulator
//! directly (see [`sampling`]).

pub mod dist;
mod limits;
mod report;
pub mod sampling;
mod skeleton;
mod targets;

pub use limits::*;
pub use report::{Check, Curve, CurvePoint, Rule, TestReport, Tolerance, Verdict};
pub use sampling::{range_curve, return_probability, MIN_EXPECTED_HITS};
pub use skeleton::{skeleton_report, SkeletonStats};
pub use targets::{targets_of, ModelKind, TheoryTargets};

use thiserror::Error;

use crate::walk::{TrajectorySummary, WalkError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("ensemble is empty")]
    Empty,
    #[error("replicates have different walk lengths ({0} and {1})")]
    MismatchedSteps(u64, u64),
    #[error("need at least {need} replicates, got {got}")]
    TooFewReplicates { need: usize, got: usize },
    #[error("checkpoint m = {0} was not recorded")]
    MissingCheckpoint(u64),
    #[error("grid time t = {0} is outside the allowed range")]
    BadGridTime(f64),
    #[error("checkpoint grid has {got} points, need at least {need}")]
    GridTooCoarse { got: usize, need: usize },
    #[error("walk length {got} is below the minimum {need}")]
    StepsTooSmall { got: u64, need: u64 },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("model is not eligible: {0}")]
    NotEligible(String),
    #[error("expected number of hits {expected:.1} is below {need}")]
    TooFewExpectedHits { expected: f64, need: f64 },
    #[error("trajectories were recorded without skeletons")]
    MissingSkeleton,
    #[error(transparent)]
    Walk(#[from] WalkError),
}

/// Replicate trajectories of one model together with its predicted limits.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub targets: TheoryTargets,
    pub runs: Vec<TrajectorySummary>,
}

impl Ensemble {
    pub fn new(targets: TheoryTargets, runs: Vec<TrajectorySummary>) -> Self {
        Ensemble { targets, runs }
    }

    pub fn replicates(&self) -> usize {
        self.runs.len()
    }

    /// Common walk length, checking that all replicates agree.
    pub fn steps(&self) -> Result<u64, StatsError> {
        let first = self.runs.first().ok_or(StatsError::Empty)?.n();
        match self.runs.iter().find(|r| r.n() != first) {
            Some(r) => Err(StatsError::MismatchedSteps(first, r.n())),
            None => Ok(first),
        }
    }

    pub(crate) fn require(&self, need: usize) -> Result<u64, StatsError> {
        let n = self.steps()?;
        if self.runs.len() < need {
            return Err(StatsError::TooFewReplicates { need, got: self.runs.len() });
        }
        Ok(n)
    }

    /// Coordinates of every replicate at step `m`.
    pub(crate) fn positions_at(&self, m: u64) -> Result<Vec<(f64, f64)>, StatsError> {
        self.runs
            .iter()
            .map(|r| {
                r.at(m)
                    .map(|c| (c.x as f64, c.y as f64))
                    .ok_or(StatsError::MissingCheckpoint(m))
            })
            .collect()
    }
}
