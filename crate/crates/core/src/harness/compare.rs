use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{run_experiment, EpochRecord, ExperimentConfig, HarnessError, RunTrace};
use crate::problems::format_f64;

/// Environment variable capping the number of sweep workers.
pub const THREADS_ENV: &str = "EXADAM_THREADS";

/// Epochs shown in the per-epoch table; the final epoch is always added.
pub const CHECKPOINT_EPOCHS: [u64; 7] = [1, 5, 10, 25, 50, 75, 100];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub final_record: EpochRecord,
    pub best_val_loss: f64,
    pub best_val_epoch: u64,
    pub epochs_to_threshold: Option<u64>,
    pub lr_reductions: usize,
    pub checkpoints: Vec<EpochRecord>,
}

impl TraceSummary {
    pub fn of(trace: &RunTrace) -> Option<Self> {
        let final_record = *trace.final_record()?;
        let (best_val_epoch, best_val_loss) = trace.best_val()?;
        let last = final_record.epoch;
        let checkpoints = trace
            .records
            .iter()
            .filter(|r| CHECKPOINT_EPOCHS.contains(&r.epoch) || r.epoch == last)
            .copied()
            .collect();
        Some(Self {
            final_record,
            best_val_loss,
            best_val_epoch,
            epochs_to_threshold: trace
                .config
                .target_val_loss
                .and_then(|t| trace.epochs_to_threshold(t)),
            lr_reductions: trace.lr_reductions().len(),
            checkpoints,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum RunOutcome {
    Completed(TraceSummary),
    Diverged { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub optimizer: String,
    pub outcome: RunOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub problem: String,
    pub seed: u64,
    pub epochs: u64,
    pub batch_size: usize,
    pub target_val_loss: Option<f64>,
    pub rows: Vec<ReportRow>,
    /// Traces of the runs that completed, in row order.
    #[serde(skip)]
    pub traces: Vec<RunTrace>,
}

fn check_shared(cfgs: &[ExperimentConfig]) -> Result<(), HarnessError> {
    let first = cfgs
        .first()
        .ok_or_else(|| HarnessError::InvalidConfig("no experiments to compare".into()))?;
    for (i, c) in cfgs.iter().enumerate().skip(1) {
        let field = if c.problem != first.problem {
            "problem"
        } else if c.seed != first.seed {
            "seed"
        } else if c.epochs != first.epochs {
            "epochs"
        } else if c.batch_size != first.batch_size {
            "batch_size"
        } else if c.target_val_loss != first.target_val_loss {
            "target_val_loss"
        } else {
            continue;
        };
        return Err(HarnessError::ConfigMismatch(format!(
            "experiment {i} differs from experiment 0 in `{field}`"
        )));
    }
    Ok(())
}

/// Worker count: `EXADAM_THREADS` if set, else available parallelism,
/// never more than `jobs`.
pub fn sweep_threads(jobs: usize) -> Result<usize, HarnessError> {
    let cap = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| {
                HarnessError::InvalidConfig(format!(
                    "{THREADS_ENV}={v:?} is not a positive integer"
                ))
            })?,
        Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    Ok(cap.min(jobs).max(1))
}

/// Run every config and tabulate the results. Runs that diverge get a row
/// with the reason instead of aborting the sweep; other errors abort.
pub fn compare_optimizers(cfgs: &[ExperimentConfig]) -> Result<ComparisonReport, HarnessError> {
    check_shared(cfgs)?;
    for c in cfgs {
        c.validate()?;
    }
    let threads = sweep_threads(cfgs.len())?;
    compare_with_threads(cfgs, threads)
}

pub fn compare_with_threads(
    cfgs: &[ExperimentConfig],
    threads: usize,
) -> Result<ComparisonReport, HarnessError> {
    check_shared(cfgs)?;
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<RunTrace, HarnessError>>>> =
        Mutex::new(vec![None; cfgs.len()]);
    std::thread::scope(|s| {
        for _ in 0..threads.max(1) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(cfg) = cfgs.get(i) else { break };
                let r = run_experiment(cfg);
                results.lock().expect("worker panicked")[i] = Some(r);
            });
        }
    });
    let first = &cfgs[0];
    let mut report = ComparisonReport {
        problem: String::new(),
        seed: first.seed,
        epochs: first.epochs,
        batch_size: first.batch_size,
        target_val_loss: first.target_val_loss,
        rows: Vec::with_capacity(cfgs.len()),
        traces: Vec::new(),
    };
    let results = results.into_inner().expect("worker panicked");
    for (cfg, r) in cfgs.iter().zip(results) {
        let optimizer = cfg.optimizer.kind().display_name().to_string();
        match r.expect("every job ran") {
            Ok(trace) => {
                report.problem = trace.problem.clone();
                let summary = TraceSummary::of(&trace).expect("epochs >= 1");
                report.rows.push(ReportRow {
                    optimizer,
                    outcome: RunOutcome::Completed(summary),
                });
                report.traces.push(trace);
            }
            Err(e) if e.is_divergence() => report.rows.push(ReportRow {
                optimizer,
                outcome: RunOutcome::Diverged {
                    reason: e.to_string(),
                },
            }),
            Err(e) => return Err(e),
        }
    }
    if report.problem.is_empty() {
        report.problem = format!("{:?}", first.problem);
    }
    Ok(report)
}

fn pct(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), |a| format!("{:.2}", 100.0 * a))
}

fn loss(x: f64) -> String {
    format!("{x:.5e}")
}

impl ComparisonReport {
    pub fn all_completed(&self) -> bool {
        self.rows
            .iter()
            .all(|r| matches!(r.outcome, RunOutcome::Completed(_)))
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let w = &mut out;
        let _ = writeln!(w, "# Optimizer comparison on {}\n", self.problem);
        let batch = if self.batch_size == 0 {
            "full batch".to_string()
        } else {
            format!("batch size {}", self.batch_size)
        };
        let _ = write!(w, "Seed {}, {} epochs, {batch}", self.seed, self.epochs);
        match self.target_val_loss {
            Some(t) => {
                let _ = writeln!(w, ", target validation loss {t}.\n");
            }
            None => {
                let _ = writeln!(w, ".\n");
            }
        }
        let _ = writeln!(w, "## Loss and accuracy at selected epochs\n");
        let _ = writeln!(
            w,
            "| Optimizer | Epoch | Training Loss | Training Accuracy (%) | Validation Loss | Validation Accuracy (%) |"
        );
        let _ = writeln!(w, "|---|---:|---:|---:|---:|---:|");
        for row in &self.rows {
            match &row.outcome {
                RunOutcome::Completed(s) => {
                    for (k, r) in s.checkpoints.iter().enumerate() {
                        let name = if k == 0 { row.optimizer.as_str() } else { "" };
                        let _ = writeln!(
                            w,
                            "| {name} | {} | {} | {} | {} | {} |",
                            r.epoch,
                            loss(r.train_loss),
                            pct(r.train_accuracy),
                            loss(r.val_loss),
                            pct(r.val_accuracy)
                        );
                    }
                }
                RunOutcome::Diverged { .. } => {
                    let _ = writeln!(w, "| {} | diverged | | | | |", row.optimizer);
                }
            }
        }
        let _ = writeln!(w, "\n## Summary\n");
        let _ = writeln!(
            w,
            "| Optimizer | Status | Final Validation Loss | Final Validation Accuracy (%) | Best Validation Loss | Best Epoch | Epochs to Target | LR Reductions |"
        );
        let _ = writeln!(w, "|---|---|---:|---:|---:|---:|---:|---:|");
        for row in &self.rows {
            match &row.outcome {
                RunOutcome::Completed(s) => {
                    let target = s
                        .epochs_to_threshold
                        .map_or_else(|| "not reached".into(), |e| e.to_string());
                    let target = if self.target_val_loss.is_none() {
                        "n/a".into()
                    } else {
                        target
                    };
                    let _ = writeln!(
                        w,
                        "| {} | completed | {} | {} | {} | {} | {target} | {} |",
                        row.optimizer,
                        loss(s.final_record.val_loss),
                        pct(s.final_record.val_accuracy),
                        loss(s.best_val_loss),
                        s.best_val_epoch,
                        s.lr_reductions
                    );
                }
                RunOutcome::Diverged { reason } => {
                    let _ = writeln!(w, "| {} | diverged: {reason} | | | | | | |", row.optimizer);
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per optimizer with final and best metrics.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "optimizer,status,final_train_loss,final_train_accuracy,final_val_loss,final_val_accuracy,best_val_loss,best_val_epoch,epochs_to_threshold,lr_reductions\n",
        );
        let opt = |x: Option<f64>| x.map(format_f64).unwrap_or_default();
        for row in &self.rows {
            match &row.outcome {
                RunOutcome::Completed(s) => {
                    let f = &s.final_record;
                    let _ = writeln!(
                        out,
                        "{},completed,{},{},{},{},{},{},{},{}",
                        row.optimizer,
                        format_f64(f.train_loss),
                        opt(f.train_accuracy),
                        format_f64(f.val_loss),
                        opt(f.val_accuracy),
                        format_f64(s.best_val_loss),
                        s.best_val_epoch,
                        s.epochs_to_threshold
                            .map(|e| e.to_string())
                            .unwrap_or_default(),
                        s.lr_reductions
                    );
                }
                RunOutcome::Diverged { .. } => {
                    let _ = writeln!(out, "{},diverged,,,,,,,,", row.optimizer);
                }
            }
        }
        out
    }
}
