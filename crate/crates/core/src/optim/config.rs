use serde::{Deserialize, Serialize};

use super::OptimError;

/// Hyperparameters for the Adam family (EXAdam, Adam, AdamW).
///
/// The two `enable_*` toggles only affect EXAdam: with both off its update
/// reduces to plain Adam. `weight_decay` is only read by AdamW.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub enable_cross_moment: bool,
    pub enable_accelerator: bool,
    pub weight_decay: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            alpha: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            enable_cross_moment: true,
            enable_accelerator: true,
            weight_decay: 0.0,
        }
    }
}

impl OptimizerConfig {
    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_weight_decay(mut self, weight_decay: f64) -> Self {
        self.weight_decay = weight_decay;
        self
    }

    /// Sets both EXAdam toggles at once.
    pub fn with_ablation(mut self, cross_moment: bool, accelerator: bool) -> Self {
        self.enable_cross_moment = cross_moment;
        self.enable_accelerator = accelerator;
        self
    }

    /// Both EXAdam additions switched off.
    pub fn ablated(self) -> Self {
        self.with_ablation(false, false)
    }

    pub fn validate(&self) -> Result<(), OptimError> {
        check_alpha(self.alpha)?;
        check_decay("beta1", self.beta1)?;
        check_decay("beta2", self.beta2)?;
        check_positive("epsilon", self.epsilon)?;
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(OptimError::InvalidConfig(format!(
                "weight_decay must be >= 0, got {}",
                self.weight_decay
            )));
        }
        Ok(())
    }
}

// alpha = 0 is accepted: a plateau scheduler with min_lr = 0 may drive the
// rate there, and a frozen run is a useful control.
pub(crate) fn check_alpha(alpha: f64) -> Result<(), OptimError> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(OptimError::InvalidConfig(format!(
            "alpha must be finite and >= 0, got {alpha}"
        )));
    }
    Ok(())
}

pub(crate) fn check_decay(name: &str, beta: f64) -> Result<(), OptimError> {
    if !(0.0..1.0).contains(&beta) {
        return Err(OptimError::InvalidConfig(format!(
            "{name} must lie in [0, 1), got {beta}"
        )));
    }
    Ok(())
}

pub(crate) fn check_positive(name: &str, x: f64) -> Result<(), OptimError> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(OptimError::InvalidConfig(format!(
            "{name} must be finite and > 0, got {x}"
        )));
    }
    Ok(())
}
