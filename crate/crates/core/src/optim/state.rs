use serde::{Deserialize, Serialize};

use super::{OptimError, OptimizerConfig};
use crate::numerics::Vector;

/// First/second moment buffers plus the step counter.
///
/// `beta1_pow` and `beta2_pow` carry β₁ᵗ and β₂ᵗ, updated by one
/// multiplication per step. They may underflow to zero on long runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentState {
    m: Vector,
    v: Vector,
    t: u64,
    beta1_pow: f64,
    beta2_pow: f64,
}

impl MomentState {
    pub fn new(dim: usize) -> Self {
        Self {
            m: Vector::zeros(dim),
            v: Vector::zeros(dim),
            t: 0,
            beta1_pow: 1.0,
            beta2_pow: 1.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.m.len()
    }

    pub fn m(&self) -> &Vector {
        &self.m
    }

    pub fn v(&self) -> &Vector {
        &self.v
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn beta1_pow(&self) -> f64 {
        self.beta1_pow
    }

    pub fn beta2_pow(&self) -> f64 {
        self.beta2_pow
    }

    /// Moments and powers after one more step with gradient `g`, without
    /// touching `self`. Callers commit the result once the step succeeds.
    pub(crate) fn advanced(&self, g: &Vector, cfg: &OptimizerConfig) -> MomentState {
        let (b1, b2) = (cfg.beta1, cfg.beta2);
        let m = self
            .m
            .iter()
            .zip(g)
            .map(|(&m, &g)| b1 * m + (1.0 - b1) * g)
            .collect();
        let v = self
            .v
            .iter()
            .zip(g)
            .map(|(&v, &g)| b2 * v + (1.0 - b2) * g * g)
            .collect();
        MomentState {
            m: Vector::from_vec_unchecked(m),
            v: Vector::from_vec_unchecked(v),
            t: self.t + 1,
            beta1_pow: self.beta1_pow * b1,
            beta2_pow: self.beta2_pow * b2,
        }
    }

    pub(crate) fn check_step_inputs(&self, theta: &Vector, g: &Vector) -> Result<(), OptimError> {
        if theta.len() != g.len() || g.len() != self.dim() {
            return Err(OptimError::LengthMismatch {
                theta: theta.len(),
                gradient: g.len(),
                state: self.dim(),
            });
        }
        if let Some(index) = g.first_non_finite() {
            return Err(OptimError::NonFiniteGradient { index });
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("moment state serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("moment state serializes")
    }

    /// Parses and validates a `{m, v, t, beta1_pow, beta2_pow}` snapshot.
    pub fn from_json(text: &str) -> Result<Self, OptimError> {
        let state: MomentState =
            serde_json::from_str(text).map_err(|e| OptimError::Snapshot(e.to_string()))?;
        state.validate()?;
        Ok(state)
    }

    fn validate(&self) -> Result<(), OptimError> {
        let bad = |msg: String| Err(OptimError::Snapshot(msg));
        if self.m.len() != self.v.len() {
            return bad(format!(
                "m has {} entries, v has {}",
                self.m.len(),
                self.v.len()
            ));
        }
        if !self.m.is_finite() || !self.v.is_finite() {
            return bad("non-finite moment entry".into());
        }
        if self.v.iter().any(|&x| x < 0.0) {
            return bad("negative second moment".into());
        }
        for (name, p) in [("beta1_pow", self.beta1_pow), ("beta2_pow", self.beta2_pow)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        if self.t == 0 && (self.beta1_pow != 1.0 || self.beta2_pow != 1.0) {
            return bad("t = 0 requires unit powers".into());
        }
        Ok(())
    }
}
