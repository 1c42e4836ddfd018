//! Experiment runner: epoch loop, plateau scheduler, traces and
//! multi-optimizer comparison reports.

mod compare;
mod experiment;
mod scheduler;
mod trace;

pub use compare::{
    compare_optimizers, compare_with_threads, sweep_threads, ComparisonReport, ReportRow,
    RunOutcome, TraceSummary, CHECKPOINT_EPOCHS, THREADS_ENV,
};
pub use experiment::{run_experiment, ExperimentConfig, DIVERGENCE_LIMIT};
pub use scheduler::{scheduler_step, SchedulerConfig, SchedulerState};
pub use trace::{EpochRecord, RunTrace, CSV_HEADER};

use crate::optim::OptimError;
use crate::problems::ProblemError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Optim(#[from] OptimError),
    #[error("loss diverged to {value} at epoch {epoch}, step {step}")]
    NonFiniteLoss { epoch: u64, step: u64, value: f64 },
    #[error("scheduler metric is not finite: {0}")]
    NonFiniteMetric(f64),
    #[error("configs cannot be compared: {0}")]
    ConfigMismatch(String),
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl HarnessError {
    /// Whether the run blew up numerically, as opposed to being misconfigured.
    pub fn is_divergence(&self) -> bool {
        matches!(
            self,
            HarnessError::NonFiniteLoss { .. }
                | HarnessError::NonFiniteMetric(_)
                | HarnessError::Optim(OptimError::NonFiniteGradient { .. })
                | HarnessError::Optim(OptimError::NonFiniteUpdate { .. })
        )
    }
}
