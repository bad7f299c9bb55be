//! Monte Carlo simulation of anisotropic nearest-neighbour random walks on
//! the square lattice whose vertical mobility depends only on the current
//! column, together with a battery of statistical checks of their limit laws.
//!
//! Two models are supported:
//!
//! * the fixed column model, where column `j` carries a horizontal step
//!   probability `p_j` drawn from a periodic [`ColumnProfile`], and
//! * the random environment model, where each column is either connected or
//!   not according to a stationary [`EnvironmentLaw`].
//!
//! The [`walk`] module simulates trajectories, [`statistics`] compares
//! ensembles against closed-form [`TheoryTargets`], and [`harness`] ties
//! everything together behind a config file and a deterministic parallel
//! runner.

pub mod environment;
pub mod harness;
pub mod statistics;
pub mod stream;
pub mod walk;

pub use environment::{
    ColumnField, ColumnProfile, EnvError, EnvironmentLaw, LawSpec, Model, ModelSpec, ProfileSpec,
};
pub use statistics::{Ensemble, TestReport, TheoryTargets};
pub use stream::StreamSeed;
pub use walk::{Move, Skeleton, TrajectorySummary, WalkState};
