//! Long-horizon EXAdam runs that establish the step budgets stored in
//! `goldens/convergence_budgets.json`.
//!
//! ```text
//! cargo run --release -p exadam --example calibrate_budgets -- [--write]
//! ```

use std::path::Path;

use exadam::optim::{ExAdam, Optimizer, OptimizerConfig};
use exadam::problems::{Batch, ProblemSpec};
use serde_json::json;

const HORIZON: u64 = 1_000_000;

struct Target {
    name: &'static str,
    problem: ProblemSpec,
    alpha: f64,
    threshold: f64,
    /// `f < threshold` instead of `f <= threshold`.
    strict: bool,
}

fn calibrate(t: &Target) -> serde_json::Value {
    let problem = t.problem.build(1234).unwrap();
    let mut opt = ExAdam::new(
        problem.dim(),
        OptimizerConfig::default().with_alpha(t.alpha),
    )
    .unwrap();
    let mut theta = problem.initial_point();
    let mut first_hit = None;
    let mut min_loss = f64::INFINITY;
    for step in 1..=HORIZON {
        let g = problem.gradient(&theta, Batch::Full).unwrap();
        opt.step(&mut theta, &g).unwrap();
        let f = problem.loss(&theta, Batch::Full).unwrap();
        min_loss = min_loss.min(f);
        let below = if t.strict {
            f < t.threshold
        } else {
            f <= t.threshold
        };
        if below && first_hit.is_none() {
            first_hit = Some(step);
        }
    }
    let budget = first_hit.unwrap_or_else(|| panic!("{} never reached {}", t.name, t.threshold));
    println!(
        "{}: alpha {} reaches {} at step {budget}; min over {HORIZON} steps {min_loss:e}",
        t.name, t.alpha, t.threshold
    );
    json!({
        "name": t.name,
        "problem": t.problem,
        "seed": 1234,
        "alpha": t.alpha,
        "threshold": t.threshold,
        "strict": t.strict,
        "horizon": HORIZON,
        "step_budget": budget,
        "min_loss": min_loss,
    })
}

fn main() {
    let targets = [
        Target {
            name: "quadratic",
            problem: ProblemSpec::Quadratic {
                dim: 20,
                condition_number: 100.0,
            },
            alpha: 1e-2,
            threshold: 1e-6,
            strict: false,
        },
        Target {
            name: "rosenbrock",
            problem: ProblemSpec::Rosenbrock,
            alpha: 1e-4,
            threshold: 1e-3,
            strict: true,
        },
    ];
    let budgets: Vec<_> = targets.iter().map(calibrate).collect();
    if std::env::args().any(|a| a == "--write") {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("goldens/convergence_budgets.json");
        let text = serde_json::to_string_pretty(&json!({ "budgets": budgets })).unwrap();
        std::fs::write(&path, text + "\n").unwrap();
        println!("wrote {}", path.display());
    }
}
