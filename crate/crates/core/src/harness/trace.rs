use std::fmt::Write as _;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, HarnessError};
use crate::problems::format_f64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpochRecord {
    pub epoch: u64,
    pub train_loss: f64,
    pub train_accuracy: Option<f64>,
    pub val_loss: f64,
    pub val_accuracy: Option<f64>,
    /// Rate in effect while this epoch trained.
    pub lr: f64,
}

/// Everything one run produced. `wall_time` is measured but never
/// serialized, so traces of the same config compare equal byte for byte.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunTrace {
    pub problem: String,
    pub optimizer: String,
    pub config: ExperimentConfig,
    pub records: Vec<EpochRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub step_losses: Vec<f64>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl PartialEq for RunTrace {
    fn eq(&self, other: &Self) -> bool {
        self.problem == other.problem
            && self.optimizer == other.optimizer
            && self.config == other.config
            && self.records == other.records
            && self.step_losses == other.step_losses
    }
}

pub const CSV_HEADER: &str = "epoch,train_loss,train_accuracy,val_loss,val_accuracy,lr";

impl RunTrace {
    pub fn final_record(&self) -> Option<&EpochRecord> {
        self.records.last()
    }

    /// First epoch whose validation loss is below `target`.
    pub fn epochs_to_threshold(&self, target: f64) -> Option<u64> {
        self.records
            .iter()
            .find(|r| r.val_loss < target)
            .map(|r| r.epoch)
    }

    /// Lowest validation loss and the first epoch reaching it.
    pub fn best_val(&self) -> Option<(u64, f64)> {
        self.records.iter().fold(None, |best, r| match best {
            Some((_, loss)) if loss <= r.val_loss => best,
            _ => Some((r.epoch, r.val_loss)),
        })
    }

    /// Epochs at whose end the scheduler lowered the rate.
    pub fn lr_reductions(&self) -> Vec<u64> {
        self.records
            .windows(2)
            .filter(|w| w[1].lr < w[0].lr)
            .map(|w| w[0].epoch)
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        let opt = |x: Option<f64>| x.map(format_f64).unwrap_or_default();
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.epoch,
                format_f64(r.train_loss),
                opt(r.train_accuracy),
                format_f64(r.val_loss),
                opt(r.val_accuracy),
                format_f64(r.lr)
            )
            .expect("write to String");
        }
        out
    }

    /// Per-step training losses, one per line after a `step,loss` header.
    pub fn step_losses_csv(&self) -> String {
        let mut out = String::from("step,loss\n");
        for (i, l) in self.step_losses.iter().enumerate() {
            writeln!(out, "{},{}", i + 1, format_f64(*l)).expect("write to String");
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let trace: RunTrace =
            serde_json::from_str(text).map_err(|e| HarnessError::Parse(format!("trace: {e}")))?;
        trace.validate()?;
        Ok(trace)
    }

    /// Structural checks: epochs count up from 1, metrics are finite,
    /// accuracies lie in [0, 1] and the rate never rises.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Parse(format!("trace: {msg}")));
        for (i, r) in self.records.iter().enumerate() {
            if r.epoch != i as u64 + 1 {
                return bad(format!("record {i} has epoch {}", r.epoch));
            }
            if !(r.train_loss.is_finite()
                && r.val_loss.is_finite()
                && r.lr.is_finite()
                && r.lr >= 0.0)
            {
                return bad(format!("epoch {} has non-finite metrics", r.epoch));
            }
            for acc in [r.train_accuracy, r.val_accuracy].into_iter().flatten() {
                if !(0.0..=1.0).contains(&acc) {
                    return bad(format!("epoch {} accuracy {acc} outside [0, 1]", r.epoch));
                }
            }
            if i > 0 && r.lr > self.records[i - 1].lr {
                return bad(format!("learning rate rises at epoch {}", r.epoch));
            }
        }
        if self.step_losses.iter().any(|l| !l.is_finite()) {
            return bad("non-finite step loss".into());
        }
        Ok(())
    }
}
