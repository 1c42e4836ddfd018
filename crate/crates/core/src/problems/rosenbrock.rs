use super::{check_theta, Batch, Problem, ProblemError};
use crate::numerics::Vector;

/// `f(x, y) = (1 − x)² + 100 (y − x²)²`, started from `(−1.2, 1)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Rosenbrock;

pub fn rosenbrock() -> Rosenbrock {
    Rosenbrock
}

impl Problem for Rosenbrock {
    fn name(&self) -> String {
        "rosenbrock".into()
    }

    fn dim(&self) -> usize {
        2
    }

    fn initial_point(&self) -> Vector {
        Vector::from_vec_unchecked(vec![-1.2, 1.0])
    }

    fn loss(&self, theta: &Vector, _batch: Batch<'_>) -> Result<f64, ProblemError> {
        check_theta(theta, 2)?;
        let (x, y) = (theta[0], theta[1]);
        Ok((1.0 - x).powi(2) + 100.0 * (y - x * x).powi(2))
    }

    fn gradient(&self, theta: &Vector, _batch: Batch<'_>) -> Result<Vector, ProblemError> {
        check_theta(theta, 2)?;
        let (x, y) = (theta[0], theta[1]);
        let r = y - x * x;
        Ok(Vector::from_vec_unchecked(vec![
            -2.0 * (1.0 - x) - 400.0 * x * r,
            200.0 * r,
        ]))
    }
}
