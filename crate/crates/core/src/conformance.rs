//! Named invariant suites, run by `exadam check`.

use std::fmt;

use crate::harness::{scheduler_step, SchedulerConfig, SchedulerState};
use crate::numerics::{Rng, Vector};
use crate::optim::debias::{first_moment_factor, saturation_ratio, second_moment_factor};
use crate::optim::goldens::SingleStepGoldens;
use crate::optim::{
    adam_step, compute_g_tilde, exadam_step, BiasPowers, MomentState, OptimizerConfig,
};
use crate::problems::{fd_gradient_components, Batch, Problem, ProblemSpec, DEFAULT_FD_STEP};

/// High-precision value of g̃ for g=1, v=0.1, t=100 with default β and ε.
pub const G_TILDE_V01_T100: f64 = 1.904842651919999035306497;
/// Same for v=0.001.
pub const G_TILDE_V0001_T100: f64 = 1.904833694330285758149773;

/// Slack for float rounding in the asymptotic bound `|m̃/m̂ − 1| ≤ β^t`:
/// forming the factor and the ratio each round once.
pub const ASYMPTOTIC_SLACK: f64 = 4.0 * f64::EPSILON;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {}: {}", self.name, self.detail)
    }
}

fn outcome(name: &str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome {
        name: name.to_string(),
        passed,
        detail,
    }
}

fn log_uniform(rng: &mut Rng, lo_exp: f64, hi_exp: f64) -> f64 {
    libm::pow(10.0, rng.uniform_range(lo_exp, hi_exp))
}

/// Counts from a factor-bound sweep.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FactorBoundStats {
    pub samples: usize,
    /// Ratio outside `[0, 1)` or factor outside `[1, fl(1 + β^t)]`.
    pub range_violations: usize,
    /// `|m̃/m̂ − 1| > β^t + ASYMPTOTIC_SLACK` (or the ṽ analogue).
    pub asymptotic_violations: usize,
    /// Cases exceeding `β^t` by rounding only, within the slack.
    pub rounding_only: usize,
}

/// Random `(m, v, t, β₁, β₂)` tuples checked against the correction-factor
/// bounds. Magnitudes keep `v/(v+ε)` representably below 1.
pub fn factor_bound_sweep(samples: usize, seed: u64) -> FactorBoundStats {
    let mut rng = Rng::derive(seed, 0xFAC7);
    let mut stats = FactorBoundStats {
        samples,
        ..Default::default()
    };
    for _ in 0..samples {
        let cfg = OptimizerConfig {
            beta1: rng.uniform_range(0.5, 0.999),
            beta2: rng.uniform_range(0.9, 0.99999),
            ..OptimizerConfig::default()
        };
        let t = log_uniform(&mut rng, 0.0, 4.0) as u64;
        let pows = BiasPowers {
            beta1_pow: libm::pow(cfg.beta1, t as f64),
            beta2_pow: libm::pow(cfg.beta2, t as f64),
        };
        let m = if rng.below(20) == 0 {
            0.0
        } else {
            log_uniform(&mut rng, -8.0, 3.0)
        };
        let m = if rng.below(2) == 0 { -m } else { m };
        let v = if rng.below(20) == 0 {
            0.0
        } else {
            log_uniform(&mut rng, -16.0, 6.0)
        };

        let r_v = saturation_ratio(v, cfg.epsilon);
        let r_m = saturation_ratio(m * m, cfg.epsilon);
        let f_m = first_moment_factor(v, pows, &cfg);
        let f_v = second_moment_factor(m, pows, &cfg);
        let in_range = (0.0..1.0).contains(&r_v)
            && (0.0..1.0).contains(&r_m)
            && f_m >= 1.0
            && f_m <= 1.0 + pows.beta2_pow
            && f_v >= 1.0
            && f_v <= 1.0 + pows.beta1_pow;
        if !in_range {
            stats.range_violations += 1;
        }

        let m_hat = m / (1.0 - pows.beta1_pow);
        let v_hat = v / (1.0 - pows.beta2_pow);
        let m_tilde = m_hat * f_m;
        let v_tilde = v_hat * f_v;
        let dev_m = if m_hat == 0.0 {
            0.0
        } else {
            (m_tilde / m_hat - 1.0).abs()
        };
        let dev_v = if v_hat == 0.0 {
            0.0
        } else {
            (v_tilde / v_hat - 1.0).abs()
        };
        let over = dev_m > pows.beta2_pow || dev_v > pows.beta1_pow;
        let beyond =
            dev_m > pows.beta2_pow + ASYMPTOTIC_SLACK || dev_v > pows.beta1_pow + ASYMPTOTIC_SLACK;
        if beyond {
            stats.asymptotic_violations += 1;
        } else if over {
            stats.rounding_only += 1;
        }
    }
    stats
}

pub fn factor_bounds(samples: usize, seed: u64) -> CheckOutcome {
    let s = factor_bound_sweep(samples, seed);
    outcome(
        "factor-bounds",
        s.range_violations == 0 && s.asymptotic_violations == 0,
        format!(
            "{} tuples, {} range violations, {} asymptotic violations ({} within rounding slack)",
            s.samples, s.range_violations, s.asymptotic_violations, s.rounding_only
        ),
    )
}

/// Largest elementwise relative gap between ablated EXAdam and Adam
/// trajectories on `quadratic(20, 100)`.
pub fn adam_equivalence_gap(steps: u64, seed: u64) -> f64 {
    let problem = ProblemSpec::Quadratic {
        dim: 20,
        condition_number: 100.0,
    }
    .build(seed)
    .expect("valid problem");
    let cfg = OptimizerConfig::default().with_alpha(1e-2);
    let ablated = cfg.ablated();
    let mut a = problem.initial_point();
    let mut b = a.clone();
    let mut sa = MomentState::new(a.len());
    let mut sb = MomentState::new(b.len());
    let mut worst: f64 = 0.0;
    for _ in 0..steps {
        let ga = problem.gradient(&a, Batch::Full).expect("gradient");
        let gb = problem.gradient(&b, Batch::Full).expect("gradient");
        a = exadam_step(&a, &ga, &mut sa, &ablated).expect("step").0;
        b = adam_step(&b, &gb, &mut sb, &cfg).expect("step");
        for (x, y) in a.iter().zip(&b) {
            worst = worst.max((x - y).abs() / y.abs().max(1e-300));
        }
    }
    worst
}

pub fn adam_equivalence() -> CheckOutcome {
    let gap = adam_equivalence_gap(1000, 1234);
    outcome(
        "adam-equivalence",
        gap <= 1e-12,
        format!("ablated EXAdam vs Adam over 1000 steps: max relative gap {gap:e}"),
    )
}

/// Probe points for gradient checks: `0.1 · N(0, I)`, except Rosenbrock
/// which is probed around its start `(−1.2, 1)`.
pub fn probe_points(
    spec: &ProblemSpec,
    problem: &dyn Problem,
    count: usize,
    seed: u64,
) -> Vec<Vector> {
    let mut rng = Rng::derive(seed, 0xFD);
    let center = match spec {
        ProblemSpec::Rosenbrock => problem.initial_point(),
        _ => Vector::zeros(problem.dim()),
    };
    (0..count)
        .map(|_| {
            let p: Vec<f64> = center
                .iter()
                .map(|c| c + 0.1 * rng.standard_normal())
                .collect();
            Vector::from_vec_unchecked(p)
        })
        .collect()
}

/// `(name, spec, tolerance)` for every problem family at its default size.
pub fn gradient_check_targets() -> Vec<(&'static str, ProblemSpec, f64)> {
    vec![
        (
            "quadratic",
            ProblemSpec::Quadratic {
                dim: 20,
                condition_number: 100.0,
            },
            1e-7,
        ),
        ("rosenbrock", ProblemSpec::Rosenbrock, 1e-6),
        (
            "logistic",
            ProblemSpec::Logistic {
                n: 1000,
                d: 20,
                separation: 2.0,
            },
            1e-5,
        ),
        ("mlp", ProblemSpec::default_mlp(), 1e-5),
    ]
}

/// Gradient checks that pass a coordinate when
/// `|fd − analytic| ≤ tol · max(|fd|, |analytic|) + roundoff`.
///
/// The plain relative error (denominator floored at 1e-8) is reported too.
/// For the network it cannot reach 1e-5: some gradient coordinates are near
/// 1e-8 while the two loss values, close to ln 2, are only resolved to about
/// 1e-16, so the difference quotient carries ~1e-10 of rounding noise.
pub fn gradient_checks(points: usize, seed: u64) -> Vec<CheckOutcome> {
    gradient_check_targets()
        .into_iter()
        .map(|(name, spec, tol)| {
            let problem = spec.build(seed).expect("valid problem");
            let mut worst_rel: f64 = 0.0;
            let mut bad = 0;
            for theta in probe_points(&spec, problem.as_ref(), points, seed) {
                let comps =
                    fd_gradient_components(problem.as_ref(), &theta, Batch::Full, DEFAULT_FD_STEP)
                        .expect("evaluates");
                for c in &comps {
                    worst_rel = worst_rel.max(c.relative_error());
                    let scale = c.finite_difference.abs().max(c.analytic.abs());
                    if (c.finite_difference - c.analytic).abs() > tol * scale + c.roundoff {
                        bad += 1;
                    }
                }
            }
            outcome(
                &format!("fd-gradient/{name}"),
                bad == 0,
                format!(
                    "{points} points, {bad} coordinates beyond {tol:e} relative + rounding noise; \
                     plain max relative error {worst_rel:e}"
                ),
            )
        })
        .collect()
}

pub fn accelerator_scaling() -> CheckOutcome {
    let cfg = OptimizerConfig::default();
    let g = Vector::from_vec_unchecked(vec![1.0, 1.0]);
    let v = Vector::from_vec_unchecked(vec![0.1, 0.001]);
    let out = compute_g_tilde(&g, &v, 100, &cfg).expect("valid inputs");
    let oracle_err = (out[0] - G_TILDE_V01_T100).abs() / G_TILDE_V01_T100;
    let approx_err = (out[0] - 2.0).abs() / 2.0;
    let second_err = (out[1] - G_TILDE_V0001_T100).abs() / G_TILDE_V0001_T100;
    outcome(
        "accelerator-scaling",
        oracle_err <= 1e-12 && approx_err <= 0.1,
        format!(
            "g=1, v=0.1, t=100: g~ = {:.16} (oracle rel err {oracle_err:e}, {:.1}% from 2g); \
             v=0.001: g~ = {:.16} (oracle rel err {second_err:e}, not 1.1g)",
            out[0],
            100.0 * approx_err,
            out[1]
        ),
    )
}

/// Epochs (1-based) at whose end a constant loss triggers a reduction.
pub fn constant_loss_reductions(epochs: u64, cfg: &SchedulerConfig) -> Vec<u64> {
    let mut state = SchedulerState::new(cfg).expect("valid scheduler");
    let mut lr = 1e-4;
    let mut out = Vec::new();
    for epoch in 1..=epochs {
        let next = scheduler_step(&mut state, 1.0, lr).expect("finite");
        if next < lr {
            out.push(epoch);
        }
        lr = next;
    }
    out
}

pub fn scheduler_schedule() -> CheckOutcome {
    let got = constant_loss_reductions(20, &SchedulerConfig::default());
    let expected = vec![7, 13, 19];
    outcome(
        "scheduler-plateau",
        got == expected,
        format!(
            "constant loss, patience 5: reductions after epochs {got:?} (expected {expected:?})"
        ),
    )
}

/// Regenerates the single-step diagnostics on `expected`'s inputs and
/// compares them at relative tolerance 1e-12.
pub fn single_step_goldens(name: &str, expected: &SingleStepGoldens) -> CheckOutcome {
    match expected.regenerate() {
        Ok(actual) => {
            let mismatches = actual.compare(expected, 1e-12);
            let detail = match mismatches.first() {
                None => format!("{} records match within 1e-12", expected.records.len()),
                Some(m) => format!(
                    "{} mismatches, first at t={} {}[{}]: expected {:e}, got {:e}",
                    mismatches.len(),
                    m.t,
                    m.field,
                    m.index,
                    m.expected,
                    m.actual
                ),
            };
            outcome(name, mismatches.is_empty(), detail)
        }
        Err(e) => outcome(name, false, e.to_string()),
    }
}

/// Every suite; `extra_goldens` adds a comparison against a user-supplied
/// goldens document.
pub fn run_all(extra_goldens: Option<&SingleStepGoldens>) -> Vec<CheckOutcome> {
    let mut out = vec![
        factor_bounds(100_000, 1234),
        adam_equivalence(),
        accelerator_scaling(),
        scheduler_schedule(),
    ];
    out.extend(gradient_checks(20, 1234));
    out.push(single_step_goldens(
        "goldens/reference",
        &SingleStepGoldens::reference(),
    ));
    if let Some(g) = extra_goldens {
        out.push(single_step_goldens("goldens/supplied", g));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass() {
        for c in run_all(None) {
            assert!(c.passed, "{c}");
        }
    }

    #[test]
    fn tampered_goldens_fail() {
        let mut g = SingleStepGoldens::reference();
        g.records[1].theta[0] += 1e-9;
        let c = single_step_goldens("tampered", &g);
        assert!(!c.passed);
        assert!(c.detail.contains("theta[0]"), "{}", c.detail);
    }
}
