//! Single-step reference diagnostics for regression checks.
//!
//! EXAdam is run from a fresh state on fixed inputs and the diagnostics are
//! recorded at a few step counts. The checked-in reference
//! (`goldens/single_step.json`) was produced by the 60-digit mpmath script
//! in `tests/oracle/`, which uses the same inputs.

use serde::{Deserialize, Serialize};

use super::{exadam_step, MomentState, OptimError, OptimizerConfig};
use crate::numerics::Vector;

/// The mpmath reference document.
pub const REFERENCE_JSON: &str = include_str!("../../goldens/single_step.json");

pub const GOLDEN_STEPS: [u64; 4] = [1, 2, 10, 100];
pub const GOLDEN_THETA0: [f64; 4] = [0.5, -1.0, 2.0, 0.0];
pub const GOLDEN_GRADIENT_BASE: [f64; 4] = [1.0, -0.5, 0.25, 0.0];
pub const GOLDEN_ALPHA: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldenRecord {
    pub t: u64,
    pub gradient: Vec<f64>,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub m_tilde: Vec<f64>,
    pub v_tilde: Vec<f64>,
    pub g_tilde: Vec<f64>,
    pub effective_update: Vec<f64>,
    pub theta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingleStepGoldens {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub theta0: Vec<f64>,
    pub gradient_base: Vec<f64>,
    pub records: Vec<GoldenRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoldenMismatch {
    pub t: u64,
    pub field: &'static str,
    pub index: usize,
    pub expected: f64,
    pub actual: f64,
}

/// Gradient fed at step `t`: `base · (1 + (t mod 4) / 4)`, exact in binary.
pub fn golden_gradient(base: &[f64], t: u64) -> Vec<f64> {
    let scale = 1.0 + (t % 4) as f64 / 4.0;
    base.iter().map(|b| b * scale).collect()
}

impl SingleStepGoldens {
    pub fn reference() -> Self {
        Self::from_json(REFERENCE_JSON).expect("checked-in goldens parse")
    }

    pub fn from_json(text: &str) -> Result<Self, OptimError> {
        let doc: SingleStepGoldens =
            serde_json::from_str(text).map_err(|e| OptimError::Snapshot(e.to_string()))?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("goldens serialize")
    }

    fn validate(&self) -> Result<(), OptimError> {
        let n = self.theta0.len();
        if n == 0 || self.gradient_base.len() != n {
            return Err(OptimError::Snapshot(
                "theta0 and gradient_base must be non-empty and equally long".into(),
            ));
        }
        if self.records.is_empty() {
            return Err(OptimError::Snapshot("no records".into()));
        }
        if self.records.iter().any(|r| r.t == 0 || r.t > 1_000_000) {
            return Err(OptimError::Snapshot("record step out of range".into()));
        }
        if self.records.windows(2).any(|w| w[0].t >= w[1].t) {
            return Err(OptimError::Snapshot("record steps must increase".into()));
        }
        self.config().validate()
    }

    pub fn config(&self) -> OptimizerConfig {
        OptimizerConfig {
            alpha: self.alpha,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
            ..OptimizerConfig::default()
        }
    }

    /// Goldens computed by this implementation on the standard fixed inputs.
    pub fn generate() -> Result<Self, OptimError> {
        let cfg = OptimizerConfig::default().with_alpha(GOLDEN_ALPHA);
        Self::generate_with(&cfg, &GOLDEN_THETA0, &GOLDEN_GRADIENT_BASE, &GOLDEN_STEPS)
    }

    /// Recomputes `self` with this implementation (same inputs and steps).
    pub fn regenerate(&self) -> Result<Self, OptimError> {
        let steps: Vec<u64> = self.records.iter().map(|r| r.t).collect();
        Self::generate_with(&self.config(), &self.theta0, &self.gradient_base, &steps)
    }

    pub fn generate_with(
        cfg: &OptimizerConfig,
        theta0: &[f64],
        base: &[f64],
        steps: &[u64],
    ) -> Result<Self, OptimError> {
        let last = steps.iter().copied().max().unwrap_or(0);
        let mut theta = Vector::from_vec(theta0.to_vec())
            .map_err(|e| OptimError::InvalidConfig(e.to_string()))?;
        let mut state = MomentState::new(theta.len());
        let mut records = Vec::with_capacity(steps.len());
        for t in 1..=last {
            let g = Vector::from_vec_unchecked(golden_gradient(base, t));
            let (next, diag) = exadam_step(&theta, &g, &mut state, cfg)?;
            theta = next;
            if steps.contains(&t) {
                records.push(GoldenRecord {
                    t,
                    gradient: g.into_vec(),
                    m: state.m().as_slice().to_vec(),
                    v: state.v().as_slice().to_vec(),
                    m_tilde: diag.m_tilde.into_vec(),
                    v_tilde: diag.v_tilde.into_vec(),
                    g_tilde: diag.g_tilde.into_vec(),
                    effective_update: diag.effective_update.into_vec(),
                    theta: theta.as_slice().to_vec(),
                });
            }
        }
        Ok(Self {
            alpha: cfg.alpha,
            beta1: cfg.beta1,
            beta2: cfg.beta2,
            epsilon: cfg.epsilon,
            theta0: theta0.to_vec(),
            gradient_base: base.to_vec(),
            records,
        })
    }

    /// Entries of `self` differing from `expected` by more than
    /// `rel_tol · max(|expected|, 1e-300)`; structural differences are
    /// reported as mismatches at index `usize::MAX`.
    pub fn compare(&self, expected: &SingleStepGoldens, rel_tol: f64) -> Vec<GoldenMismatch> {
        let mut out = Vec::new();
        if self.records.len() != expected.records.len() {
            out.push(GoldenMismatch {
                t: 0,
                field: "records",
                index: usize::MAX,
                expected: expected.records.len() as f64,
                actual: self.records.len() as f64,
            });
            return out;
        }
        for (a, e) in self.records.iter().zip(&expected.records) {
            let fields: [(&'static str, &[f64], &[f64]); 8] = [
                ("gradient", &a.gradient, &e.gradient),
                ("m", &a.m, &e.m),
                ("v", &a.v, &e.v),
                ("m_tilde", &a.m_tilde, &e.m_tilde),
                ("v_tilde", &a.v_tilde, &e.v_tilde),
                ("g_tilde", &a.g_tilde, &e.g_tilde),
                ("effective_update", &a.effective_update, &e.effective_update),
                ("theta", &a.theta, &e.theta),
            ];
            for (field, actual, exp) in fields {
                if a.t != e.t || actual.len() != exp.len() {
                    out.push(GoldenMismatch {
                        t: e.t,
                        field,
                        index: usize::MAX,
                        expected: exp.len() as f64,
                        actual: actual.len() as f64,
                    });
                    continue;
                }
                for (index, (&x, &y)) in actual.iter().zip(exp).enumerate() {
                    if (x - y).abs() > rel_tol * y.abs().max(1e-300) {
                        out.push(GoldenMismatch {
                            t: e.t,
                            field,
                            index,
                            expected: y,
                            actual: x,
                        });
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_document_parses() {
        let r = SingleStepGoldens::reference();
        let steps: Vec<u64> = r.records.iter().map(|r| r.t).collect();
        assert_eq!(steps, GOLDEN_STEPS);
        assert_eq!(r.theta0, GOLDEN_THETA0);
        assert_eq!(r.gradient_base, GOLDEN_GRADIENT_BASE);
        assert_eq!(r.alpha, GOLDEN_ALPHA);
    }

    #[test]
    fn implementation_matches_reference() {
        let reference = SingleStepGoldens::reference();
        let ours = SingleStepGoldens::generate().unwrap();
        let bad = ours.compare(&reference, 1e-12);
        assert!(bad.is_empty(), "{bad:#?}");
    }

    #[test]
    fn perturbation_is_detected() {
        let reference = SingleStepGoldens::reference();
        let mut ours = SingleStepGoldens::generate().unwrap();
        ours.records[2].g_tilde[1] *= 1.0 + 1e-9;
        let bad = ours.compare(&reference, 1e-12);
        assert_eq!(bad.len(), 1);
        assert_eq!((bad[0].t, bad[0].field, bad[0].index), (10, "g_tilde", 1));
    }

    #[test]
    fn roundtrip_through_json() {
        let ours = SingleStepGoldens::generate().unwrap();
        let back = SingleStepGoldens::from_json(&ours.to_json()).unwrap();
        assert_eq!(back, ours);
        assert!(back.regenerate().unwrap().compare(&ours, 0.0).is_empty());
    }

    #[test]
    fn rejects_malformed() {
        assert!(SingleStepGoldens::from_json("{}").is_err());
        let mut doc = SingleStepGoldens::generate().unwrap();
        doc.records.swap(0, 1);
        assert!(SingleStepGoldens::from_json(&doc.to_json()).is_err());
    }
}
