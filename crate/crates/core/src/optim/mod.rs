//! EXAdam and the baseline optimizers behind one stepping contract.

mod adam;
mod baselines;
mod config;
pub mod debias;
mod exadam;
pub mod goldens;
mod state;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::numerics::Vector;

pub use adam::{adam_step, adamw_step, Adam};
pub use baselines::{
    adadelta_step, rmsprop_step, sgd_momentum_step, AdaDelta, AdaDeltaConfig, AdaDeltaState,
    RmsProp, RmsPropConfig, RmsPropState, SgdMomentum, SgdMomentumConfig, SgdMomentumState,
};
pub use config::OptimizerConfig;
pub use debias::{compute_g_tilde, compute_m_tilde, compute_v_tilde, BiasPowers};
pub use exadam::{exadam_step, ExAdam, StepDiagnostics};
pub use state::MomentState;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OptimError {
    #[error("length mismatch: theta {theta}, gradient {gradient}, state {state}")]
    LengthMismatch {
        theta: usize,
        gradient: usize,
        state: usize,
    },
    #[error("non-finite gradient at index {index}")]
    NonFiniteGradient { index: usize },
    #[error("step produced a non-finite parameter at index {index}")]
    NonFiniteUpdate { index: usize },
    #[error("step counter must be >= 1, got {0}")]
    InvalidStep(u64),
    #[error("invalid optimizer config: {0}")]
    InvalidConfig(String),
    #[error("unknown optimizer `{0}`")]
    UnknownOptimizer(String),
    #[error("invalid state snapshot: {0}")]
    Snapshot(String),
}

/// Common stepping contract. `step` replaces `theta` in place and must leave
/// both `theta` and the optimizer state unchanged when it returns an error.
pub trait Optimizer: Send {
    fn kind(&self) -> OptimizerKind;
    fn step(&mut self, theta: &mut Vector, g: &Vector) -> Result<(), OptimError>;
    fn learning_rate(&self) -> f64;
    fn set_learning_rate(&mut self, lr: f64);
    fn steps_taken(&self) -> u64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OptimizerKind {
    ExAdam,
    Adam,
    AdamW,
    RmsProp,
    SgdMomentum,
    AdaDelta,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 6] = [
        OptimizerKind::ExAdam,
        OptimizerKind::Adam,
        OptimizerKind::AdamW,
        OptimizerKind::RmsProp,
        OptimizerKind::SgdMomentum,
        OptimizerKind::AdaDelta,
    ];

    /// Identifier used in config files.
    pub fn id(self) -> &'static str {
        match self {
            OptimizerKind::ExAdam => "exadam",
            OptimizerKind::Adam => "adam",
            OptimizerKind::AdamW => "adamw",
            OptimizerKind::RmsProp => "rmsprop",
            OptimizerKind::SgdMomentum => "sgd-momentum",
            OptimizerKind::AdaDelta => "adadelta",
        }
    }

    /// Display name used in reports.
    pub fn display_name(self) -> &'static str {
        match self {
            OptimizerKind::ExAdam => "EXAdam",
            OptimizerKind::Adam => "Adam",
            OptimizerKind::AdamW => "AdamW",
            OptimizerKind::RmsProp => "RMSProp",
            OptimizerKind::SgdMomentum => "SGD with Momentum",
            OptimizerKind::AdaDelta => "AdaDelta",
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

impl FromStr for OptimizerKind {
    type Err = OptimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        let kind = match norm.as_str() {
            "exadam" => OptimizerKind::ExAdam,
            "adam" => OptimizerKind::Adam,
            "adamw" => OptimizerKind::AdamW,
            "rmsprop" => OptimizerKind::RmsProp,
            "sgd-momentum" | "sgd" | "momentum" => OptimizerKind::SgdMomentum,
            "adadelta" => OptimizerKind::AdaDelta,
            _ => return Err(OptimError::UnknownOptimizer(s.to_string())),
        };
        Ok(kind)
    }
}

/// An optimizer choice together with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OptimizerSpec {
    Exadam(OptimizerConfig),
    Adam(OptimizerConfig),
    Adamw(OptimizerConfig),
    Rmsprop(RmsPropConfig),
    SgdMomentum(SgdMomentumConfig),
    Adadelta(AdaDeltaConfig),
}

impl OptimizerSpec {
    /// Commonly published defaults for each optimizer.
    pub fn defaults(kind: OptimizerKind) -> Self {
        let adam = OptimizerConfig {
            alpha: 1e-3,
            ..OptimizerConfig::default()
        };
        match kind {
            OptimizerKind::ExAdam => OptimizerSpec::Exadam(OptimizerConfig::default()),
            OptimizerKind::Adam => OptimizerSpec::Adam(adam),
            OptimizerKind::AdamW => OptimizerSpec::Adamw(adam.with_weight_decay(1e-2)),
            OptimizerKind::RmsProp => OptimizerSpec::Rmsprop(RmsPropConfig::default()),
            OptimizerKind::SgdMomentum => OptimizerSpec::SgdMomentum(SgdMomentumConfig::default()),
            OptimizerKind::AdaDelta => OptimizerSpec::Adadelta(AdaDeltaConfig::default()),
        }
    }

    pub fn kind(&self) -> OptimizerKind {
        match self {
            OptimizerSpec::Exadam(_) => OptimizerKind::ExAdam,
            OptimizerSpec::Adam(_) => OptimizerKind::Adam,
            OptimizerSpec::Adamw(_) => OptimizerKind::AdamW,
            OptimizerSpec::Rmsprop(_) => OptimizerKind::RmsProp,
            OptimizerSpec::SgdMomentum(_) => OptimizerKind::SgdMomentum,
            OptimizerSpec::Adadelta(_) => OptimizerKind::AdaDelta,
        }
    }

    pub fn learning_rate(&self) -> f64 {
        match self {
            OptimizerSpec::Exadam(c) | OptimizerSpec::Adam(c) | OptimizerSpec::Adamw(c) => c.alpha,
            OptimizerSpec::Rmsprop(c) => c.alpha,
            OptimizerSpec::SgdMomentum(c) => c.alpha,
            OptimizerSpec::Adadelta(c) => c.alpha,
        }
    }

    pub fn with_learning_rate(mut self, lr: f64) -> Self {
        match &mut self {
            OptimizerSpec::Exadam(c) | OptimizerSpec::Adam(c) | OptimizerSpec::Adamw(c) => {
                c.alpha = lr
            }
            OptimizerSpec::Rmsprop(c) => c.alpha = lr,
            OptimizerSpec::SgdMomentum(c) => c.alpha = lr,
            OptimizerSpec::Adadelta(c) => c.alpha = lr,
        }
        self
    }

    pub fn validate(&self) -> Result<(), OptimError> {
        match self {
            OptimizerSpec::Exadam(c) | OptimizerSpec::Adam(c) | OptimizerSpec::Adamw(c) => {
                c.validate()
            }
            OptimizerSpec::Rmsprop(c) => c.validate(),
            OptimizerSpec::SgdMomentum(c) => c.validate(),
            OptimizerSpec::Adadelta(c) => c.validate(),
        }
    }

    pub fn build(&self, dim: usize) -> Result<Box<dyn Optimizer>, OptimError> {
        Ok(match *self {
            OptimizerSpec::Exadam(c) => Box::new(ExAdam::new(dim, c)?),
            OptimizerSpec::Adam(c) => Box::new(Adam::new(dim, c)?),
            OptimizerSpec::Adamw(c) => Box::new(Adam::new_w(dim, c)?),
            OptimizerSpec::Rmsprop(c) => Box::new(RmsProp::new(dim, c)?),
            OptimizerSpec::SgdMomentum(c) => Box::new(SgdMomentum::new(dim, c)?),
            OptimizerSpec::Adadelta(c) => Box::new(AdaDelta::new(dim, c)?),
        })
    }
}
