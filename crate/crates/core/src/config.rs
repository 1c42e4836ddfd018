//! Experiment files: TOML with `[problem]`, `[optimizer]`, `[scheduler]` and
//! `[run]` sections.
//!
//! ```toml
//! [problem]
//! kind = "mlp"
//!
//! [optimizer]
//! kinds = ["exadam", "adam"]   # or `kind = "exadam"` for a single run
//! alpha = 1e-4                 # applied to every listed optimizer
//!
//! [optimizer.adam]             # per-optimizer overrides
//! beta2 = 0.99
//!
//! [scheduler]
//! patience = 5
//!
//! [run]
//! epochs = 100
//! batch_size = 32
//! seed = 1234
//! ```
//!
//! Keys in `[optimizer]` other than `kind`, `kinds` and sub-tables apply to
//! every listed optimizer and must be valid for each of them.

use serde::Deserialize;
use serde_json::{Map, Value};

use crate::harness::{ExperimentConfig, HarnessError, SchedulerConfig};
use crate::optim::{OptimizerKind, OptimizerSpec};
use crate::problems::ProblemSpec;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileLayout {
    problem: ProblemSpec,
    optimizer: toml::Table,
    #[serde(default)]
    scheduler: SchedulerConfig,
    run: RunSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunSection {
    epochs: u64,
    #[serde(default)]
    batch_size: usize,
    seed: u64,
    #[serde(default)]
    target_val_loss: Option<f64>,
    #[serde(default)]
    record_step_losses: bool,
}

/// A parsed experiment file: one config per listed optimizer, sharing
/// problem, seed and schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentFile {
    pub experiments: Vec<ExperimentConfig>,
}

impl ExperimentFile {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let layout: FileLayout =
            toml::from_str(text).map_err(|e| HarnessError::Parse(e.message().to_string()))?;
        let kinds = optimizer_kinds(&layout.optimizer)?;
        let shared: Map<String, Value> = layout
            .optimizer
            .iter()
            .filter(|(k, v)| *k != "kind" && *k != "kinds" && !v.is_table())
            .map(|(k, v)| Ok((k.clone(), to_json(v)?)))
            .collect::<Result<_, HarnessError>>()?;
        for (key, value) in &layout.optimizer {
            if value.is_table() && !kinds.iter().any(|k| k.id() == key) {
                return Err(HarnessError::Parse(format!(
                    "optimizer overrides for `{key}`, which is not listed"
                )));
            }
        }
        let mut experiments = Vec::with_capacity(kinds.len());
        for kind in kinds {
            let mut fields = shared.clone();
            if let Some(toml::Value::Table(own)) = layout.optimizer.get(kind.id()) {
                for (k, v) in own {
                    fields.insert(k.clone(), to_json(v)?);
                }
            }
            let optimizer = optimizer_spec(kind, fields)?;
            let run = &layout.run;
            let cfg = ExperimentConfig {
                problem: layout.problem.clone(),
                optimizer,
                epochs: run.epochs,
                batch_size: run.batch_size,
                seed: run.seed,
                scheduler: layout.scheduler,
                target_val_loss: run.target_val_loss,
                record_step_losses: run.record_step_losses,
            };
            cfg.validate()?;
            experiments.push(cfg);
        }
        Ok(Self { experiments })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        for e in &mut self.experiments {
            e.seed = seed;
        }
        self
    }
}

fn optimizer_kinds(section: &toml::Table) -> Result<Vec<OptimizerKind>, HarnessError> {
    let parse = |v: &toml::Value| -> Result<OptimizerKind, HarnessError> {
        let s = v.as_str().ok_or_else(|| {
            HarnessError::Parse(format!("optimizer kind must be a string, got {v}"))
        })?;
        Ok(s.parse::<OptimizerKind>()?)
    };
    let kinds = match (section.get("kind"), section.get("kinds")) {
        (Some(k), None) => vec![parse(k)?],
        (None, Some(toml::Value::Array(list))) if !list.is_empty() => {
            list.iter().map(parse).collect::<Result<Vec<_>, _>>()?
        }
        (None, Some(_)) => {
            return Err(HarnessError::Parse(
                "`kinds` must be a non-empty array".into(),
            ))
        }
        (Some(_), Some(_)) => {
            return Err(HarnessError::Parse(
                "give either `kind` or `kinds`, not both".into(),
            ))
        }
        (None, None) => {
            return Err(HarnessError::Parse(
                "[optimizer] needs `kind` or `kinds`".into(),
            ))
        }
    };
    for (i, k) in kinds.iter().enumerate() {
        if kinds[..i].contains(k) {
            return Err(HarnessError::Parse(format!(
                "optimizer `{}` listed twice",
                k.id()
            )));
        }
    }
    Ok(kinds)
}

fn to_json(v: &toml::Value) -> Result<Value, HarnessError> {
    serde_json::to_value(v).map_err(|e| HarnessError::Parse(e.to_string()))
}

/// Start from the optimizer's defaults and overlay `fields`.
fn optimizer_spec(
    kind: OptimizerKind,
    fields: Map<String, Value>,
) -> Result<OptimizerSpec, HarnessError> {
    let mut value = serde_json::to_value(OptimizerSpec::defaults(kind)).expect("spec serializes");
    let obj = value.as_object_mut().expect("tagged struct");
    for (k, v) in fields {
        // TOML integers arrive as JSON integers; real-valued fields accept them.
        obj.insert(k, v);
    }
    let spec: OptimizerSpec = serde_json::from_value(value)
        .map_err(|e| HarnessError::Parse(format!("optimizer `{}`: {e}", kind.id())))?;
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SWEEP: &str = r#"
[problem]
kind = "mlp"

[optimizer]
kinds = ["exadam", "adam", "adamw", "rmsprop", "sgd-momentum", "adadelta"]
alpha = 1e-4

[optimizer.adamw]
weight_decay = 0.05

[scheduler]
factor = 0.1
patience = 5

[run]
epochs = 100
batch_size = 32
seed = 1234
"#;

    #[test]
    fn sweep_file() {
        let file = ExperimentFile::parse(SWEEP).unwrap();
        assert_eq!(file.experiments.len(), 6);
        for e in &file.experiments {
            assert_eq!(e.optimizer.learning_rate(), 1e-4);
            assert_eq!(e.problem, ProblemSpec::default_mlp());
            assert_eq!(e.seed, 1234);
        }
        match file.experiments[2].optimizer {
            OptimizerSpec::Adamw(c) => assert_eq!(c.weight_decay, 0.05),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn single_run_with_integer_reals() {
        let text = r#"
[problem]
kind = "quadratic"
dim = 20
condition_number = 100

[optimizer]
kind = "exadam"
alpha = 0.1
enable_accelerator = false

[run]
epochs = 10
seed = 1
"#;
        let file = ExperimentFile::parse(text).unwrap();
        let e = &file.experiments[0];
        assert_eq!(
            e.problem,
            ProblemSpec::Quadratic {
                dim: 20,
                condition_number: 100.0
            }
        );
        match e.optimizer {
            OptimizerSpec::Exadam(c) => assert!(!c.enable_accelerator && c.enable_cross_moment),
            other => panic!("{other:?}"),
        }
        assert_eq!(e.scheduler, SchedulerConfig::default());
        assert_eq!(file.with_seed(9).experiments[0].seed, 9);
    }

    #[test]
    fn rejects_bad_files() {
        let base = "[problem]\nkind = \"rosenbrock\"\n[run]\nepochs = 3\nseed = 1\n";
        for opt in [
            "[optimizer]\n",
            "[optimizer]\nkind = \"lion\"\n",
            "[optimizer]\nkind = \"adam\"\nkinds = [\"adam\"]\n",
            "[optimizer]\nkinds = []\n",
            "[optimizer]\nkinds = [\"adam\", \"adam\"]\n",
            "[optimizer]\nkind = \"rmsprop\"\nweight_decay = 0.1\n",
            "[optimizer]\nkind = \"adam\"\nalpha = -1.0\n",
            "[optimizer]\nkind = \"adam\"\n[optimizer.sgd-momentum]\nmomentum = 0.5\n",
        ] {
            let text = format!("{base}{opt}");
            assert!(ExperimentFile::parse(&text).is_err(), "{opt}");
        }
        assert!(ExperimentFile::parse(
            "[problem]\nkind = \"rosenbrock\"\n[optimizer]\nkind = \"adam\"\n[run]\nepochs = 3\n"
        )
        .is_err());
        assert!(ExperimentFile::parse("not toml [").is_err());
    }
}
