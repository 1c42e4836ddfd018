//! Desk-scale objectives with analytic gradients, synthetic datasets and a
//! finite-difference gradient checker.

mod dataset;
mod gradcheck;
mod logistic;
mod mlp;
mod quadratic;
mod rosenbrock;

use serde::{Deserialize, Serialize};

use crate::numerics::Vector;

pub(crate) use dataset::batch_slice;
pub use dataset::{format_f64, Dataset, Labels, Split, SplitFractions, MAX_CLASSES};
pub use gradcheck::{fd_gradient_check, fd_gradient_components, FdComponent, DEFAULT_FD_STEP};
pub use logistic::{gaussian_clouds, logistic_regression_problem, LogisticRegression};
pub use mlp::{mlp_problem, spiral, Mlp};
pub use quadratic::{quadratic_problem, Quadratic};
pub use rosenbrock::{rosenbrock, Rosenbrock};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProblemError {
    #[error("invalid dimension: {0}")]
    InvalidDim(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("parameter vector has length {got}, problem expects {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("batch index {index} out of range for {len} rows")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("empty batch")]
    EmptyBatch,
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("csv: {0}")]
    Csv(String),
}

/// Rows an evaluation runs over. Ignored by problems without a dataset.
#[derive(Debug, Clone, Copy)]
pub enum Batch<'a> {
    /// Every row of the dataset.
    Full,
    Rows(&'a [usize]),
}

impl<'a> Batch<'a> {
    pub(crate) fn resolve(self, n: usize) -> Result<BatchRows<'a>, ProblemError> {
        match self {
            Batch::Full if n == 0 => Err(ProblemError::EmptyBatch),
            Batch::Full => Ok(BatchRows::Range(n)),
            Batch::Rows([]) => Err(ProblemError::EmptyBatch),
            Batch::Rows(rows) => {
                if let Some(&index) = rows.iter().find(|&&i| i >= n) {
                    return Err(ProblemError::IndexOutOfRange { index, len: n });
                }
                Ok(BatchRows::Slice(rows))
            }
        }
    }
}

pub(crate) enum BatchRows<'a> {
    Range(usize),
    Slice(&'a [usize]),
}

impl BatchRows<'_> {
    pub(crate) fn len(&self) -> usize {
        match self {
            BatchRows::Range(n) => *n,
            BatchRows::Slice(s) => s.len(),
        }
    }

    pub(crate) fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        let (range, slice) = match self {
            BatchRows::Range(n) => (0..*n, &[][..]),
            BatchRows::Slice(s) => (0..0, *s),
        };
        range.chain(slice.iter().copied())
    }
}

/// An objective with an analytic gradient behind one evaluation contract.
///
/// Evaluation is pure: the same `(theta, batch)` always yields the same
/// bits.
pub trait Problem: Send + Sync {
    fn name(&self) -> String;

    fn dim(&self) -> usize;

    fn initial_point(&self) -> Vector;

    fn loss(&self, theta: &Vector, batch: Batch<'_>) -> Result<f64, ProblemError>;

    fn gradient(&self, theta: &Vector, batch: Batch<'_>) -> Result<Vector, ProblemError>;

    fn loss_and_gradient(
        &self,
        theta: &Vector,
        batch: Batch<'_>,
    ) -> Result<(f64, Vector), ProblemError> {
        Ok((self.loss(theta, batch)?, self.gradient(theta, batch)?))
    }

    /// Classification accuracy in `[0, 1]`, for problems that have one.
    fn accuracy(&self, _theta: &Vector, _batch: Batch<'_>) -> Option<Result<f64, ProblemError>> {
        None
    }

    fn dataset(&self) -> Option<&Dataset> {
        None
    }
}

pub(crate) fn check_theta(theta: &Vector, dim: usize) -> Result<(), ProblemError> {
    if theta.len() != dim {
        return Err(ProblemError::LengthMismatch {
            expected: dim,
            got: theta.len(),
        });
    }
    Ok(())
}

/// Serializable problem description; `build` instantiates it from a seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProblemSpec {
    Quadratic {
        dim: usize,
        condition_number: f64,
    },
    Rosenbrock,
    Logistic {
        #[serde(default = "default_logistic_n")]
        n: usize,
        #[serde(default = "default_logistic_d")]
        d: usize,
        #[serde(default = "default_separation")]
        separation: f64,
    },
    Mlp {
        #[serde(default = "default_layers")]
        layers: Vec<usize>,
        #[serde(default = "default_spiral_n")]
        n_points: usize,
        #[serde(default = "default_spiral_noise")]
        noise: f64,
    },
}

fn default_logistic_n() -> usize {
    1000
}
fn default_logistic_d() -> usize {
    20
}
fn default_separation() -> f64 {
    2.0
}
fn default_layers() -> Vec<usize> {
    vec![2, 16, 16, 2]
}
fn default_spiral_n() -> usize {
    500
}
fn default_spiral_noise() -> f64 {
    0.1
}

impl ProblemSpec {
    pub fn default_mlp() -> Self {
        ProblemSpec::Mlp {
            layers: default_layers(),
            n_points: default_spiral_n(),
            noise: default_spiral_noise(),
        }
    }

    pub fn build(&self, seed: u64) -> Result<Box<dyn Problem>, ProblemError> {
        Ok(match self {
            ProblemSpec::Quadratic {
                dim,
                condition_number,
            } => Box::new(quadratic_problem(*dim, *condition_number, seed)?),
            ProblemSpec::Rosenbrock => Box::new(rosenbrock()),
            ProblemSpec::Logistic { n, d, separation } => {
                Box::new(logistic_regression_problem(*n, *d, *separation, seed)?)
            }
            ProblemSpec::Mlp {
                layers,
                n_points,
                noise,
            } => {
                let data = spiral(*n_points, *noise, seed)?;
                Box::new(mlp_problem(layers, data, seed)?)
            }
        })
    }
}
