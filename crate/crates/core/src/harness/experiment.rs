use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{scheduler_step, EpochRecord, HarnessError, RunTrace, SchedulerConfig, SchedulerState};
use crate::numerics::Vector;
use crate::optim::{Optimizer, OptimizerSpec};
use crate::problems::{Batch, Problem, ProblemSpec};

/// Losses above this count as divergence.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

/// One optimizer on one problem. A `batch_size` of 0 means full batch;
/// problems without a dataset always take one full-batch step per epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub optimizer: OptimizerSpec,
    pub epochs: u64,
    #[serde(default)]
    pub batch_size: usize,
    pub seed: u64,
    #[serde(default)]
    pub scheduler: SchedulerConfig,
    #[serde(default)]
    pub target_val_loss: Option<f64>,
    #[serde(default)]
    pub record_step_losses: bool,
}

impl ExperimentConfig {
    pub fn new(problem: ProblemSpec, optimizer: OptimizerSpec, epochs: u64, seed: u64) -> Self {
        Self {
            problem,
            optimizer,
            epochs,
            batch_size: 0,
            seed,
            scheduler: SchedulerConfig::default(),
            target_val_loss: None,
            record_step_losses: false,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.optimizer.validate()?;
        self.scheduler.validate()?;
        if self.epochs == 0 {
            return Err(HarnessError::InvalidConfig("epochs must be >= 1".into()));
        }
        if let Some(t) = self.target_val_loss {
            if !t.is_finite() {
                return Err(HarnessError::InvalidConfig(format!("target_val_loss {t}")));
            }
        }
        Ok(())
    }
}

fn guard(loss: f64, epoch: u64, step: u64) -> Result<f64, HarnessError> {
    if !loss.is_finite() || loss > DIVERGENCE_LIMIT {
        return Err(HarnessError::NonFiniteLoss {
            epoch,
            step,
            value: loss,
        });
    }
    Ok(loss)
}

struct Runner<'a> {
    problem: &'a dyn Problem,
    optimizer: Box<dyn Optimizer>,
    theta: Vector,
    step: u64,
    step_losses: Option<Vec<f64>>,
}

impl Runner<'_> {
    fn step(&mut self, batch: Batch<'_>, epoch: u64) -> Result<(), HarnessError> {
        self.step += 1;
        let (loss, g) = self.problem.loss_and_gradient(&self.theta, batch)?;
        let loss = guard(loss, epoch, self.step)?;
        if let Some(losses) = &mut self.step_losses {
            losses.push(loss);
        }
        self.optimizer.step(&mut self.theta, &g)?;
        Ok(())
    }

    fn evaluate(&self, batch: Batch<'_>, epoch: u64) -> Result<(f64, Option<f64>), HarnessError> {
        let loss = guard(self.problem.loss(&self.theta, batch)?, epoch, self.step)?;
        let acc = self.problem.accuracy(&self.theta, batch).transpose()?;
        Ok((loss, acc))
    }
}

/// Train from a fresh problem and optimizer built from `cfg.seed`.
///
/// Each epoch shuffles the training split, steps through its batches, then
/// evaluates full-batch train and validation metrics. The scheduler reads the
/// validation loss. Problems without a dataset report their full objective
/// in both columns.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunTrace, HarnessError> {
    cfg.validate()?;
    let start = Instant::now();
    let problem = cfg.problem.build(cfg.seed)?;
    let mut runner = Runner {
        problem: problem.as_ref(),
        optimizer: cfg.optimizer.build(problem.dim())?,
        theta: problem.initial_point(),
        step: 0,
        step_losses: cfg.record_step_losses.then(Vec::new),
    };
    let mut scheduler = SchedulerState::new(&cfg.scheduler)?;
    if let Some(data) = problem.dataset() {
        if data.split().train.is_empty() {
            return Err(HarnessError::InvalidConfig(
                "training split is empty".into(),
            ));
        }
    }
    let mut records = Vec::with_capacity(cfg.epochs as usize);
    for epoch in 1..=cfg.epochs {
        let lr = runner.optimizer.learning_rate();
        let (train, val) = match problem.dataset() {
            Some(data) => {
                let order = data.epoch_order(cfg.seed, epoch);
                for b in 0..data.batches_per_epoch(cfg.batch_size) {
                    let rows = crate::problems::batch_slice(&order, b, cfg.batch_size);
                    runner.step(Batch::Rows(rows), epoch)?;
                }
                let split = data.split();
                let train = runner.evaluate(Batch::Rows(&split.train), epoch)?;
                let val = if split.validation.is_empty() {
                    train
                } else {
                    runner.evaluate(Batch::Rows(&split.validation), epoch)?
                };
                (train, val)
            }
            None => {
                runner.step(Batch::Full, epoch)?;
                let m = runner.evaluate(Batch::Full, epoch)?;
                (m, m)
            }
        };
        records.push(EpochRecord {
            epoch,
            train_loss: train.0,
            train_accuracy: train.1,
            val_loss: val.0,
            val_accuracy: val.1,
            lr,
        });
        if cfg.scheduler.enabled {
            let next = scheduler_step(&mut scheduler, val.0, lr)?;
            runner.optimizer.set_learning_rate(next);
        }
    }
    Ok(RunTrace {
        problem: problem.name(),
        optimizer: cfg.optimizer.kind().display_name().to_string(),
        config: cfg.clone(),
        records,
        step_losses: runner.step_losses.unwrap_or_default(),
        wall_time: start.elapsed(),
    })
}
