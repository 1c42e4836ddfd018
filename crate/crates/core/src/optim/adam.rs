//! Reference Adam and AdamW.
//!
//! Written independently of the EXAdam kernels so that ablated EXAdam can be
//! checked against it.

use super::{MomentState, OptimError, Optimizer, OptimizerConfig, OptimizerKind};
use crate::numerics::Vector;

/// One Adam step: `θ ← θ − α · m̂ / (√v̂ + ε)`.
pub fn adam_step(
    theta: &Vector,
    g: &Vector,
    state: &mut MomentState,
    cfg: &OptimizerConfig,
) -> Result<Vector, OptimError> {
    adam_like(theta, g, state, cfg, 0.0)
}

/// One AdamW step: decoupled decay `θ ← θ − α·λ·θ` followed by the Adam update.
pub fn adamw_step(
    theta: &Vector,
    g: &Vector,
    state: &mut MomentState,
    cfg: &OptimizerConfig,
) -> Result<Vector, OptimError> {
    adam_like(theta, g, state, cfg, cfg.weight_decay)
}

fn adam_like(
    theta: &Vector,
    g: &Vector,
    state: &mut MomentState,
    cfg: &OptimizerConfig,
    weight_decay: f64,
) -> Result<Vector, OptimError> {
    state.check_step_inputs(theta, g)?;
    let next = state.advanced(g, cfg);
    let c1 = 1.0 - next.beta1_pow();
    let c2 = 1.0 - next.beta2_pow();
    let mut out = Vec::with_capacity(theta.len());
    for i in 0..theta.len() {
        let m_hat = next.m()[i] / c1;
        let v_hat = next.v()[i] / c2;
        let decayed = theta[i] - cfg.alpha * weight_decay * theta[i];
        let th = decayed - cfg.alpha * m_hat / (v_hat.sqrt() + cfg.epsilon);
        if !th.is_finite() {
            return Err(OptimError::NonFiniteUpdate { index: i });
        }
        out.push(th);
    }
    *state = next;
    Ok(Vector::from_vec_unchecked(out))
}

#[derive(Debug, Clone)]
pub struct Adam {
    cfg: OptimizerConfig,
    state: MomentState,
    decoupled: bool,
}

impl Adam {
    pub fn new(dim: usize, cfg: OptimizerConfig) -> Result<Self, OptimError> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            state: MomentState::new(dim),
            decoupled: false,
        })
    }

    /// AdamW with `cfg.weight_decay`.
    pub fn new_w(dim: usize, cfg: OptimizerConfig) -> Result<Self, OptimError> {
        Ok(Self {
            decoupled: true,
            ..Self::new(dim, cfg)?
        })
    }

    pub fn state(&self) -> &MomentState {
        &self.state
    }
}

impl Optimizer for Adam {
    fn kind(&self) -> OptimizerKind {
        if self.decoupled {
            OptimizerKind::AdamW
        } else {
            OptimizerKind::Adam
        }
    }

    fn step(&mut self, theta: &mut Vector, g: &Vector) -> Result<(), OptimError> {
        *theta = if self.decoupled {
            adamw_step(theta, g, &mut self.state, &self.cfg)?
        } else {
            adam_step(theta, g, &mut self.state, &self.cfg)?
        };
        Ok(())
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

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_vec(xs.to_vec()).unwrap()
    }

    #[test]
    fn first_step_is_about_alpha() {
        let cfg = OptimizerConfig::default().with_alpha(1e-3);
        for g in [1.0, -3.0, 1e-3, 250.0] {
            let mut state = MomentState::new(1);
            let th = adam_step(&v(&[0.0]), &v(&[g]), &mut state, &cfg).unwrap();
            assert!((th[0].abs() - 1e-3).abs() < 1e-8, "g={g} step={}", th[0]);
            assert_eq!(th[0].signum(), -g.signum());
        }
        // reference: -0.0009999999900000001208 (m̂ = v̂ = 1)
        let mut state = MomentState::new(1);
        let th = adam_step(&v(&[0.0]), &v(&[1.0]), &mut state, &cfg).unwrap();
        assert!((th[0] + 0.0009999999900000001208166803).abs() < 1e-18);
    }

    #[test]
    fn zero_gradient_never_moves() {
        let mut opt = Adam::new(2, OptimizerConfig::default()).unwrap();
        let mut theta = v(&[0.5, -0.5]);
        for _ in 0..20 {
            opt.step(&mut theta, &Vector::zeros(2)).unwrap();
        }
        assert_eq!(theta.as_slice(), &[0.5, -0.5]);
    }

    #[test]
    fn steady_state_constant_gradient() {
        let cfg = OptimizerConfig::default().with_alpha(1e-3);
        let mut state = MomentState::new(1);
        let mut theta = v(&[0.0]);
        let mut last = 0.0;
        for _ in 0..20_000 {
            let next = adam_step(&theta, &v(&[0.5]), &mut state, &cfg).unwrap();
            last = next[0] - theta[0];
            theta = next;
        }
        // m̂ → g, v̂ → g², so each step → -α·g/|g|
        assert!((state.m()[0] - 0.5).abs() < 1e-12);
        assert!((state.v()[0] - 0.25).abs() < 1e-9);
        assert!((last + 1e-3).abs() < 1e-9, "{last}");
    }

    #[test]
    fn adamw_without_decay_is_adam() {
        let cfg = OptimizerConfig::default().with_alpha(1e-2);
        let mut a = Adam::new(3, cfg).unwrap();
        let mut w = Adam::new_w(3, cfg.with_weight_decay(0.0)).unwrap();
        let mut ta = v(&[1.0, 2.0, -3.0]);
        let mut tw = ta.clone();
        for k in 0..200 {
            let g = v(&[ta[0] * 2.0, (k as f64).sin(), ta[2] - 1.0]);
            let gw = v(&[tw[0] * 2.0, (k as f64).sin(), tw[2] - 1.0]);
            a.step(&mut ta, &g).unwrap();
            w.step(&mut tw, &gw).unwrap();
            for i in 0..3 {
                assert!((ta[i] - tw[i]).abs() <= 1e-15);
            }
        }
        assert_eq!(w.kind(), OptimizerKind::AdamW);
    }

    #[test]
    fn adamw_decay_shrinks_parameters() {
        let cfg = OptimizerConfig::default()
            .with_alpha(0.1)
            .with_weight_decay(0.5);
        let mut state = MomentState::new(1);
        let th = adamw_step(&v(&[2.0]), &v(&[0.0]), &mut state, &cfg).unwrap();
        assert!((th[0] - (2.0 - 0.1 * 0.5 * 2.0)).abs() < 1e-15);
    }
}
