//! Cross-moment debiasing and the gradient accelerator.
//!
//! For step `t` with bias powers `p1 = β₁ᵗ`, `p2 = β₂ᵗ`:
//!
//! ```text
//! m̃ = m / (1 - p1) · (1 + v / (v + ε) · p2)
//! ṽ = v / (1 - p2) · (1 + m² / (m² + ε) · p1)
//! g̃ = g / (1 - p1) · (1 + v / (v + ε) · p2)
//! ```
//!
//! Each parenthesised correction factor lies in `[1, 1 + p)` and tends to 1
//! as the powers decay, so m̃ → m̂ and ṽ → v̂ (Adam's corrections).

use super::{OptimError, OptimizerConfig};
use crate::numerics::Vector;

/// β₁ᵗ and β₂ᵗ for a given step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasPowers {
    pub beta1_pow: f64,
    pub beta2_pow: f64,
}

impl BiasPowers {
    /// Powers at step `t` (t ≥ 1), built by repeated multiplication so the
    /// values match a stepping [`MomentState`](super::MomentState) bit for bit.
    pub fn at_step(t: u64, cfg: &OptimizerConfig) -> Result<Self, OptimError> {
        if t < 1 {
            return Err(OptimError::InvalidStep(t));
        }
        Ok(Self {
            beta1_pow: repeated_power(cfg.beta1, t),
            beta2_pow: repeated_power(cfg.beta2, t),
        })
    }
}

fn repeated_power(beta: f64, t: u64) -> f64 {
    let mut p = 1.0;
    for _ in 0..t {
        p *= beta;
        if p == 0.0 {
            break;
        }
    }
    p
}

/// `x / (x + ε)` for `x ≥ 0`; exactly 0 when `x` is 0.
#[inline]
pub fn saturation_ratio(x: f64, epsilon: f64) -> f64 {
    x / (x + epsilon)
}

/// `1 + ratio · pow`.
#[inline]
pub fn correction_factor(ratio: f64, pow: f64) -> f64 {
    1.0 + ratio * pow
}

/// Correction factor multiplying m̂ (and the accelerator): `1 + v/(v+ε)·β₂ᵗ`.
#[inline]
pub fn first_moment_factor(v: f64, pows: BiasPowers, cfg: &OptimizerConfig) -> f64 {
    correction_factor(saturation_ratio(v, cfg.epsilon), pows.beta2_pow)
}

/// Correction factor multiplying v̂: `1 + m²/(m²+ε)·β₁ᵗ`.
#[inline]
pub fn second_moment_factor(m: f64, pows: BiasPowers, cfg: &OptimizerConfig) -> f64 {
    correction_factor(saturation_ratio(m * m, cfg.epsilon), pows.beta1_pow)
}

/// Scalar m̃ for precomputed powers. Adam's m̂ when cross-moment debiasing
/// is disabled.
#[inline]
pub fn m_tilde(m: f64, v: f64, pows: BiasPowers, cfg: &OptimizerConfig) -> f64 {
    let m_hat = m / (1.0 - pows.beta1_pow);
    if cfg.enable_cross_moment {
        m_hat * first_moment_factor(v, pows, cfg)
    } else {
        m_hat
    }
}

#[inline]
pub fn v_tilde(m: f64, v: f64, pows: BiasPowers, cfg: &OptimizerConfig) -> f64 {
    let v_hat = v / (1.0 - pows.beta2_pow);
    if cfg.enable_cross_moment {
        v_hat * second_moment_factor(m, pows, cfg)
    } else {
        v_hat
    }
}

/// Scalar g̃; 0 when the accelerator is disabled.
#[inline]
pub fn g_tilde(g: f64, v: f64, pows: BiasPowers, cfg: &OptimizerConfig) -> f64 {
    if cfg.enable_accelerator {
        g / (1.0 - pows.beta1_pow) * first_moment_factor(v, pows, cfg)
    } else {
        0.0
    }
}

fn check_pair(a: &Vector, b: &Vector) -> Result<(), OptimError> {
    if a.len() != b.len() {
        return Err(OptimError::LengthMismatch {
            theta: a.len(),
            gradient: b.len(),
            state: b.len(),
        });
    }
    Ok(())
}

fn zip_map(a: &Vector, b: &Vector, f: impl Fn(f64, f64) -> f64) -> Result<Vector, OptimError> {
    check_pair(a, b)?;
    Ok(Vector::from_vec_unchecked(
        a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect(),
    ))
}

/// Debiased first moment m̃.
pub fn compute_m_tilde(
    m: &Vector,
    v: &Vector,
    t: u64,
    cfg: &OptimizerConfig,
) -> Result<Vector, OptimError> {
    let pows = BiasPowers::at_step(t, cfg)?;
    zip_map(m, v, |m, v| m_tilde(m, v, pows, cfg))
}

/// Debiased second moment ṽ.
pub fn compute_v_tilde(
    m: &Vector,
    v: &Vector,
    t: u64,
    cfg: &OptimizerConfig,
) -> Result<Vector, OptimError> {
    let pows = BiasPowers::at_step(t, cfg)?;
    zip_map(m, v, |m, v| v_tilde(m, v, pows, cfg))
}

/// Gradient accelerator g̃. All zeros when the accelerator is disabled.
pub fn compute_g_tilde(
    g: &Vector,
    v: &Vector,
    t: u64,
    cfg: &OptimizerConfig,
) -> Result<Vector, OptimError> {
    let pows = BiasPowers::at_step(t, cfg)?;
    zip_map(g, v, |g, v| g_tilde(g, v, pows, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(x: f64) -> Vector {
        Vector::from_vec(vec![x]).unwrap()
    }

    fn cfg() -> OptimizerConfig {
        OptimizerConfig::default()
    }

    #[test]
    fn zero_first_moment() {
        for t in [1, 7, 1000] {
            let r = compute_m_tilde(&one(0.0), &one(3.5), t, &cfg()).unwrap();
            assert_eq!(r[0], 0.0);
        }
    }

    #[test]
    fn zero_second_moment_gives_plain_correction() {
        let r = compute_m_tilde(&one(0.42), &one(0.0), 3, &cfg()).unwrap();
        assert_eq!(r[0], 0.42 / (1.0 - 0.9 * 0.9 * 0.9));
        assert!((r[0] - 0.42 / 0.271).abs() < 1e-15);

        let r = compute_v_tilde(&one(0.3), &one(0.0), 5, &cfg()).unwrap();
        assert_eq!(r[0], 0.0);

        let r = compute_v_tilde(&one(0.0), &one(0.5), 2, &cfg()).unwrap();
        assert_eq!(r[0], 0.5 / (1.0 - 0.999 * 0.999));

        let r = compute_g_tilde(&one(1.0), &one(0.0), 4, &cfg()).unwrap();
        assert_eq!(r[0], 1.0 / (1.0 - repeated_power(0.9, 4)));
    }

    // Reference values from tests/oracle/exadam_oracle.py (60-digit mpmath).
    #[test]
    fn matches_high_precision_reference() {
        let c = cfg();
        let mt = compute_m_tilde(&one(0.1), &one(0.001), 1, &c).unwrap()[0];
        assert!((mt - 1.998990010099899554953003).abs() < 1e-12, "{mt}");
        let vt = compute_v_tilde(&one(0.1), &one(0.001), 1, &c).unwrap()[0];
        assert!((vt - 1.899999100000898373317999).abs() < 1e-12, "{vt}");
        let gt = compute_g_tilde(&one(1.0), &one(0.1), 100, &c).unwrap()[0];
        assert!((gt - 1.904842651919999035306497).abs() < 1e-12, "{gt}");
    }

    #[test]
    fn accelerator_decays_to_gradient() {
        let gt = compute_g_tilde(&one(1.0), &one(0.1), 1_000_000, &cfg()).unwrap()[0];
        assert!((gt - 1.0).abs() < 1e-12);
    }

    #[test]
    fn toggles() {
        let off = cfg().ablated();
        let mt = compute_m_tilde(&one(0.1), &one(0.001), 1, &off).unwrap()[0];
        assert_eq!(mt, 0.1 / (1.0 - 0.9));
        let gt = compute_g_tilde(&one(5.0), &one(0.001), 1, &off).unwrap()[0];
        assert_eq!(gt, 0.0);
        let accel_only = cfg().with_ablation(false, true);
        let gt = compute_g_tilde(&one(1.0), &one(0.1), 100, &accel_only).unwrap()[0];
        assert!(gt > 1.9);
    }

    #[test]
    fn step_zero_rejected() {
        assert_eq!(
            compute_m_tilde(&one(1.0), &one(1.0), 0, &cfg()).unwrap_err(),
            OptimError::InvalidStep(0)
        );
        assert!(compute_v_tilde(&one(1.0), &one(1.0), 0, &cfg()).is_err());
        assert!(compute_g_tilde(&one(1.0), &one(1.0), 0, &cfg()).is_err());
    }

    #[test]
    fn powers_decay_below_normal_range() {
        // both stick at 5·2⁻¹⁰⁷⁴, where x·β rounds back to x
        let p = BiasPowers::at_step(1_000_000, &cfg()).unwrap();
        assert!(p.beta1_pow < f64::MIN_POSITIVE);
        assert!(p.beta2_pow < f64::MIN_POSITIVE);
        assert_eq!(first_moment_factor(0.1, p, &cfg()), 1.0);
    }
}
