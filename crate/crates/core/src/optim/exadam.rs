use serde::{Deserialize, Serialize};

use super::debias::{g_tilde, m_tilde, v_tilde, BiasPowers};
use super::{MomentState, OptimError, Optimizer, OptimizerConfig, OptimizerKind};
use crate::numerics::Vector;

/// Intermediate quantities of one EXAdam step.
///
/// `effective_update[i] = -alpha · (m_tilde[i] + g_tilde[i]) / (sqrt(v_tilde[i]) + epsilon)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub m_tilde: Vector,
    pub v_tilde: Vector,
    pub g_tilde: Vector,
    pub effective_update: Vector,
}

/// One EXAdam step.
///
/// The counter and bias powers advance first and the moments are updated
/// with `g` before m̃, ṽ and g̃ are formed, so the first call uses `t = 1`.
/// `state` is left untouched if the step fails.
pub fn exadam_step(
    theta: &Vector,
    g: &Vector,
    state: &mut MomentState,
    cfg: &OptimizerConfig,
) -> Result<(Vector, StepDiagnostics), OptimError> {
    state.check_step_inputs(theta, g)?;
    let next = state.advanced(g, cfg);
    let pows = BiasPowers {
        beta1_pow: next.beta1_pow(),
        beta2_pow: next.beta2_pow(),
    };

    let n = theta.len();
    let mut mt = Vec::with_capacity(n);
    let mut vt = Vec::with_capacity(n);
    let mut gt = Vec::with_capacity(n);
    let mut update = Vec::with_capacity(n);
    let mut new_theta = Vec::with_capacity(n);
    for i in 0..n {
        let (m, v) = (next.m()[i], next.v()[i]);
        let a = m_tilde(m, v, pows, cfg);
        let b = v_tilde(m, v, pows, cfg);
        let c = g_tilde(g[i], v, pows, cfg);
        let u = -cfg.alpha * (a + c) / (b.sqrt() + cfg.epsilon);
        let th = theta[i] + u;
        if !th.is_finite() {
            return Err(OptimError::NonFiniteUpdate { index: i });
        }
        mt.push(a);
        vt.push(b);
        gt.push(c);
        update.push(u);
        new_theta.push(th);
    }

    *state = next;
    Ok((
        Vector::from_vec_unchecked(new_theta),
        StepDiagnostics {
            m_tilde: Vector::from_vec_unchecked(mt),
            v_tilde: Vector::from_vec_unchecked(vt),
            g_tilde: Vector::from_vec_unchecked(gt),
            effective_update: Vector::from_vec_unchecked(update),
        },
    ))
}

/// EXAdam bound to its own moment state.
#[derive(Debug, Clone)]
pub struct ExAdam {
    cfg: OptimizerConfig,
    state: MomentState,
}

impl ExAdam {
    pub fn new(dim: usize, cfg: OptimizerConfig) -> Result<Self, OptimError> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            state: MomentState::new(dim),
        })
    }

    pub fn config(&self) -> &OptimizerConfig {
        &self.cfg
    }

    pub fn state(&self) -> &MomentState {
        &self.state
    }

    pub fn step_with_diagnostics(
        &mut self,
        theta: &mut Vector,
        g: &Vector,
    ) -> Result<StepDiagnostics, OptimError> {
        let (next, diag) = exadam_step(theta, g, &mut self.state, &self.cfg)?;
        *theta = next;
        Ok(diag)
    }
}

impl Optimizer for ExAdam {
    fn kind(&self) -> OptimizerKind {
        OptimizerKind::ExAdam
    }

    fn step(&mut self, theta: &mut Vector, g: &Vector) -> Result<(), OptimError> {
        self.step_with_diagnostics(theta, g).map(|_| ())
    }

    fn learning_rate(&self) -> f64 {
        self.cfg.alpha
    }

    fn set_learning_rate(&mut self, lr: f64) {
        self.cfg.alpha = lr;
    }

    fn steps_taken(&self) -> u64 {
        self.state.t()
    }
}
