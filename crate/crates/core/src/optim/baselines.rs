//! RMSProp, SGD with momentum and AdaDelta.
//!
//! Update rules and default hyperparameters follow the common reference
//! implementations (PyTorch's `RMSprop`, `SGD(momentum=…)`, `Adadelta`).

use serde::{Deserialize, Serialize};

use super::config::{check_alpha, check_decay, check_positive};
use super::{OptimError, Optimizer, OptimizerKind};
use crate::numerics::Vector;

fn check_inputs(theta: &Vector, g: &Vector, state_dim: usize) -> Result<(), OptimError> {
    if theta.len() != g.len() || g.len() != state_dim {
        return Err(OptimError::LengthMismatch {
            theta: theta.len(),
            gradient: g.len(),
            state: state_dim,
        });
    }
    if let Some(index) = g.first_non_finite() {
        return Err(OptimError::NonFiniteGradient { index });
    }
    Ok(())
}

fn finish(out: Vec<f64>) -> Result<Vector, OptimError> {
    match out.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(OptimError::NonFiniteUpdate { index }),
        None => Ok(Vector::from_vec_unchecked(out)),
    }
}

// ---------------------------------------------------------------- RMSProp

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RmsPropConfig {
    pub alpha: f64,
    /// Smoothing constant of the squared-gradient average.
    pub decay: f64,
    pub epsilon: f64,
}

impl Default for RmsPropConfig {
    fn default() -> Self {
        Self {
            alpha: 1e-2,
            decay: 0.99,
            epsilon: 1e-8,
        }
    }
}

impl RmsPropConfig {
    pub fn validate(&self) -> Result<(), OptimError> {
        check_alpha(self.alpha)?;
        check_decay("decay", self.decay)?;
        check_positive("epsilon", self.epsilon)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmsPropState {
    pub sq_avg: Vector,
    pub t: u64,
}

impl RmsPropState {
    pub fn new(dim: usize) -> Self {
        Self {
            sq_avg: Vector::zeros(dim),
            t: 0,
        }
    }
}

/// `s ← ρ·s + (1−ρ)·g²`, `θ ← θ − α·g / (√s + ε)`.
pub fn rmsprop_step(
    theta: &Vector,
    g: &Vector,
    state: &mut RmsPropState,
    cfg: &RmsPropConfig,
) -> Result<Vector, OptimError> {
    check_inputs(theta, g, state.sq_avg.len())?;
    let rho = cfg.decay;
    let sq: Vec<f64> = state
        .sq_avg
        .iter()
        .zip(g)
        .map(|(&s, &g)| rho * s + (1.0 - rho) * g * g)
        .collect();
    let out = theta
        .iter()
        .zip(g)
        .zip(&sq)
        .map(|((&th, &g), &s)| th - cfg.alpha * g / (s.sqrt() + cfg.epsilon))
        .collect();
    let out = finish(out)?;
    state.sq_avg = Vector::from_vec_unchecked(sq);
    state.t += 1;
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct RmsProp {
    cfg: RmsPropConfig,
    state: RmsPropState,
}

impl RmsProp {
    pub fn new(dim: usize, cfg: RmsPropConfig) -> Result<Self, OptimError> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            state: RmsPropState::new(dim),
        })
    }
}

impl Optimizer for RmsProp {
    fn kind(&self) -> OptimizerKind {
        OptimizerKind::RmsProp
    }

    fn step(&mut self, theta: &mut Vector, g: &Vector) -> Result<(), OptimError> {
        *theta = rmsprop_step(theta, g, &mut self.state, &self.cfg)?;
        Ok(())
    }

    fn learning_rate(&self) -> f64 {
        self.cfg.alpha
    }

    fn set_learning_rate(&mut self, lr: f64) {
        self.cfg.alpha = lr;
    }

    fn steps_taken(&self) -> u64 {
        self.state.t
    }
}

// ---------------------------------------------------------- SGD + momentum

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SgdMomentumConfig {
    pub alpha: f64,
    pub momentum: f64,
}

impl Default for SgdMomentumConfig {
    fn default() -> Self {
        Self {
            alpha: 1e-2,
            momentum: 0.9,
        }
    }
}

impl SgdMomentumConfig {
    pub fn validate(&self) -> Result<(), OptimError> {
        check_alpha(self.alpha)?;
        check_decay("momentum", self.momentum)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SgdMomentumState {
    /// `None` until the first step, which seeds the buffer with `g`.
    pub velocity: Option<Vector>,
    pub dim: usize,
    pub t: u64,
}

impl SgdMomentumState {
    pub fn new(dim: usize) -> Self {
        Self {
            velocity: None,
            dim,
            t: 0,
        }
    }
}

/// `b ← μ·b + g` (b = g on the first step), `θ ← θ − α·b`.
pub fn sgd_momentum_step(
    theta: &Vector,
    g: &Vector,
    state: &mut SgdMomentumState,
    cfg: &SgdMomentumConfig,
) -> Result<Vector, OptimError> {
    check_inputs(theta, g, state.dim)?;
    let buf: Vec<f64> = match &state.velocity {
        None => g.as_slice().to_vec(),
        Some(b) => b
            .iter()
            .zip(g)
            .map(|(&b, &g)| cfg.momentum * b + g)
            .collect(),
    };
    let out = theta
        .iter()
        .zip(&buf)
        .map(|(&th, &b)| th - cfg.alpha * b)
        .collect();
    let out = finish(out)?;
    state.velocity = Some(Vector::from_vec_unchecked(buf));
    state.t += 1;
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct SgdMomentum {
    cfg: SgdMomentumConfig,
    state: SgdMomentumState,
}

impl SgdMomentum {
    pub fn new(dim: usize, cfg: SgdMomentumConfig) -> Result<Self, OptimError> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            state: SgdMomentumState::new(dim),
        })
    }
}

impl Optimizer for SgdMomentum {
    fn kind(&self) -> OptimizerKind {
        OptimizerKind::SgdMomentum
    }

    fn step(&mut self, theta: &mut Vector, g: &Vector) -> Result<(), OptimError> {
        *theta = sgd_momentum_step(theta, g, &mut self.state, &self.cfg)?;
        Ok(())
    }

    fn learning_rate(&self) -> f64 {
        self.cfg.alpha
    }

    fn set_learning_rate(&mut self, lr: f64) {
        self.cfg.alpha = lr;
    }

    fn steps_taken(&self) -> u64 {
        self.state.t
    }
}

// --------------------------------------------------------------- AdaDelta

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdaDeltaConfig {
    pub alpha: f64,
    pub rho: f64,
    pub epsilon: f64,
}

impl Default for AdaDeltaConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            rho: 0.9,
            epsilon: 1e-6,
        }
    }
}

impl AdaDeltaConfig {
    pub fn validate(&self) -> Result<(), OptimError> {
        check_alpha(self.alpha)?;
        check_decay("rho", self.rho)?;
        check_positive("epsilon", self.epsilon)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaDeltaState {
    pub sq_avg: Vector,
    pub acc_delta: Vector,
    pub t: u64,
}

impl AdaDeltaState {
    pub fn new(dim: usize) -> Self {
        Self {
            sq_avg: Vector::zeros(dim),
            acc_delta: Vector::zeros(dim),
            t: 0,
        }
    }
}

/// ```text
/// s ← ρ·s + (1−ρ)·g²
/// Δ = √(a + ε) / √(s + ε) · g
/// a ← ρ·a + (1−ρ)·Δ²
/// θ ← θ − α·Δ
/// ```
pub fn adadelta_step(
    theta: &Vector,
    g: &Vector,
    state: &mut AdaDeltaState,
    cfg: &AdaDeltaConfig,
) -> Result<Vector, OptimError> {
    check_inputs(theta, g, state.sq_avg.len())?;
    let (rho, eps) = (cfg.rho, cfg.epsilon);
    let n = theta.len();
    let mut sq = Vec::with_capacity(n);
    let mut acc = Vec::with_capacity(n);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let s = rho * state.sq_avg[i] + (1.0 - rho) * g[i] * g[i];
        let delta = (state.acc_delta[i] + eps).sqrt() / (s + eps).sqrt() * g[i];
        acc.push(rho * state.acc_delta[i] + (1.0 - rho) * delta * delta);
        sq.push(s);
        out.push(theta[i] - cfg.alpha * delta);
    }
    let out = finish(out)?;
    state.sq_avg = Vector::from_vec_unchecked(sq);
    state.acc_delta = Vector::from_vec_unchecked(acc);
    state.t += 1;
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct AdaDelta {
    cfg: AdaDeltaConfig,
    state: AdaDeltaState,
}

impl AdaDelta {
    pub fn new(dim: usize, cfg: AdaDeltaConfig) -> Result<Self, OptimError> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            state: AdaDeltaState::new(dim),
        })
    }
}

impl Optimizer for AdaDelta {
    fn kind(&self) -> OptimizerKind {
        OptimizerKind::AdaDelta
    }

    fn step(&mut self, theta: &mut Vector, g: &Vector) -> Result<(), OptimError> {
        *theta = adadelta_step(theta, g, &mut self.state, &self.cfg)?;
        Ok(())
    }

    fn learning_rate(&self) -> f64 {
        self.cfg.alpha
    }

    fn set_learning_rate(&mut self, lr: f64) {
        self.cfg.alpha = lr;
    }

    fn steps_taken(&self) -> u64 {
        self.state.t
    }
}
