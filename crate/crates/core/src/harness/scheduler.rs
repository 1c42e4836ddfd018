use serde::{Deserialize, Serialize};

use super::HarnessError;

/// Reduce-on-plateau settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchedulerConfig {
    pub enabled: bool,
    pub factor: f64,
    pub patience: u32,
    pub min_lr: f64,
    pub rel_threshold: f64,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            factor: 0.1,
            patience: 5,
            min_lr: 0.0,
            rel_threshold: 1e-4,
        }
    }
}

impl SchedulerConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if !(self.factor > 0.0 && self.factor < 1.0) {
            return Err(HarnessError::InvalidConfig(format!(
                "scheduler factor must be in (0, 1), got {}",
                self.factor
            )));
        }
        if !(self.min_lr >= 0.0 && self.min_lr.is_finite()) {
            return Err(HarnessError::InvalidConfig(format!(
                "scheduler min_lr must be >= 0, got {}",
                self.min_lr
            )));
        }
        if !(self.rel_threshold >= 0.0 && self.rel_threshold < 1.0) {
            return Err(HarnessError::InvalidConfig(format!(
                "scheduler rel_threshold must be in [0, 1), got {}",
                self.rel_threshold
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchedulerState {
    pub factor: f64,
    pub patience: u32,
    pub best_metric: f64,
    pub bad_epochs: u32,
    pub min_lr: f64,
    pub rel_threshold: f64,
}

impl SchedulerState {
    pub fn new(cfg: &SchedulerConfig) -> Result<Self, HarnessError> {
        cfg.validate()?;
        Ok(Self {
            factor: cfg.factor,
            patience: cfg.patience,
            best_metric: f64::INFINITY,
            bad_epochs: 0,
            min_lr: cfg.min_lr,
            rel_threshold: cfg.rel_threshold,
        })
    }
}

/// Feed one epoch's validation loss and return the learning rate for the
/// next epoch.
///
/// The metric improves when it drops below `best · (1 − rel_threshold)`.
/// After more than `patience` epochs without improvement the rate becomes
/// `max(lr · factor, min_lr)`, never exceeding the current rate.
pub fn scheduler_step(
    state: &mut SchedulerState,
    val_loss: f64,
    current_lr: f64,
) -> Result<f64, HarnessError> {
    if !val_loss.is_finite() {
        return Err(HarnessError::NonFiniteMetric(val_loss));
    }
    if val_loss < state.best_metric * (1.0 - state.rel_threshold) {
        state.best_metric = val_loss;
        state.bad_epochs = 0;
        return Ok(current_lr);
    }
    state.bad_epochs += 1;
    if state.bad_epochs > state.patience {
        state.bad_epochs = 0;
        return Ok((current_lr * state.factor)
            .max(state.min_lr)
            .min(current_lr));
    }
    Ok(current_lr)
}
