use super::{Batch, Problem, ProblemError};
use crate::numerics::Vector;

pub const DEFAULT_FD_STEP: f64 = 1e-6;

/// One coordinate of a finite-difference comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdComponent {
    pub index: usize,
    pub analytic: f64,
    pub finite_difference: f64,
    /// Size of the difference quotient's error from rounding the two loss
    /// values alone: `4 · ε_mach · max(|f(θ ± h·eᵢ)|) / h`.
    pub roundoff: f64,
}

impl FdComponent {
    /// `|fd − analytic| / max(|fd|, |analytic|, 1e-8)`.
    pub fn relative_error(&self) -> f64 {
        let denom = self
            .finite_difference
            .abs()
            .max(self.analytic.abs())
            .max(1e-8);
        (self.finite_difference - self.analytic).abs() / denom
    }
}

/// Analytic gradient next to central differences
/// `(f(θ + h·eᵢ) − f(θ − h·eᵢ)) / 2h` for every coordinate.
pub fn fd_gradient_components(
    problem: &dyn Problem,
    theta: &Vector,
    batch: Batch<'_>,
    h: f64,
) -> Result<Vec<FdComponent>, ProblemError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(ProblemError::InvalidParameter(format!(
            "step h must be > 0, got {h}"
        )));
    }
    let analytic = problem.gradient(theta, batch)?;
    let mut probe = theta.clone();
    let mut out = Vec::with_capacity(theta.len());
    for i in 0..theta.len() {
        let x = theta[i];
        probe.as_mut_slice()[i] = x + h;
        let plus = problem.loss(&probe, batch)?;
        probe.as_mut_slice()[i] = x - h;
        let minus = problem.loss(&probe, batch)?;
        probe.as_mut_slice()[i] = x;
        out.push(FdComponent {
            index: i,
            analytic: analytic[i],
            finite_difference: (plus - minus) / (2.0 * h),
            roundoff: 4.0 * f64::EPSILON * plus.abs().max(minus.abs()) / h,
        });
    }
    Ok(out)
}

/// Largest [`FdComponent::relative_error`] over all coordinates.
pub fn fd_gradient_check(
    problem: &dyn Problem,
    theta: &Vector,
    batch: Batch<'_>,
    h: f64,
) -> Result<f64, ProblemError> {
    Ok(fd_gradient_components(problem, theta, batch, h)?
        .iter()
        .map(FdComponent::relative_error)
        .fold(0.0, f64::max))
}
