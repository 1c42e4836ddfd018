use super::{check_theta, Batch, Problem, ProblemError};
use crate::numerics::{compensated_dot, Matrix, Rng, Vector};

/// `f(θ) = ½ θᵀAθ` with `A = Q diag(λ) Qᵀ`, `Q` a seeded random rotation
/// and `λ` log-spaced in `[1, κ]`. The minimum is `f = 0` at `θ = 0`.
#[derive(Debug, Clone)]
pub struct Quadratic {
    a: Matrix,
    eigenvalues: Vec<f64>,
    condition_number: f64,
    x0: Vector,
}

pub fn quadratic_problem(
    dim: usize,
    condition_number: f64,
    seed: u64,
) -> Result<Quadratic, ProblemError> {
    if dim == 0 {
        return Err(ProblemError::InvalidDim("dim must be >= 1".into()));
    }
    if !(condition_number >= 1.0 && condition_number.is_finite()) {
        return Err(ProblemError::InvalidDim(format!(
            "condition number must be finite and >= 1, got {condition_number}"
        )));
    }
    let eigenvalues: Vec<f64> = if dim == 1 {
        vec![1.0]
    } else {
        (0..dim)
            .map(|i| libm::pow(condition_number, i as f64 / (dim - 1) as f64))
            .collect()
    };
    let mut rng = Rng::derive(seed, 0x0A);
    let q = random_orthogonal(dim, &mut rng);
    let mut a = Matrix::zeros(dim, dim);
    for r in 0..dim {
        for c in r..dim {
            let s: f64 = (0..dim)
                .map(|k| q.get(r, k) * eigenvalues[k] * q.get(c, k))
                .sum();
            a.set(r, c, s);
            a.set(c, r, s);
        }
    }
    let mut rng = Rng::derive(seed, 0x0B);
    let x0 = Vector::from_vec_unchecked((0..dim).map(|_| rng.standard_normal()).collect());
    Ok(Quadratic {
        a,
        eigenvalues,
        condition_number,
        x0,
    })
}

/// Modified Gram-Schmidt on a Gaussian matrix; columns are orthonormal.
fn random_orthogonal(n: usize, rng: &mut Rng) -> Matrix {
    let mut cols: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.standard_normal()).collect())
        .collect();
    for j in 0..n {
        for k in 0..j {
            let (done, rest) = cols.split_at_mut(j);
            let proj: f64 = done[k].iter().zip(&rest[0]).map(|(a, b)| a * b).sum();
            for (x, q) in rest[0].iter_mut().zip(&done[k]) {
                *x -= proj * q;
            }
        }
        let norm = cols[j].iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in &mut cols[j] {
            *x /= norm;
        }
    }
    let mut q = Matrix::zeros(n, n);
    for (c, col) in cols.iter().enumerate() {
        for (r, &x) in col.iter().enumerate() {
            q.set(r, c, x);
        }
    }
    q
}

impl Quadratic {
    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }
}

impl Problem for Quadratic {
    fn name(&self) -> String {
        format!(
            "quadratic(dim={}, cond={})",
            self.a.rows(),
            self.condition_number
        )
    }

    fn dim(&self) -> usize {
        self.a.rows()
    }

    fn initial_point(&self) -> Vector {
        self.x0.clone()
    }

    fn loss(&self, theta: &Vector, _batch: Batch<'_>) -> Result<f64, ProblemError> {
        let (f, _) = self.loss_and_gradient(theta, _batch)?;
        Ok(f)
    }

    fn gradient(&self, theta: &Vector, _batch: Batch<'_>) -> Result<Vector, ProblemError> {
        check_theta(theta, self.dim())?;
        let rows = (0..self.dim()).map(|r| compensated_dot(self.a.row(r), theta.as_slice()));
        Ok(Vector::from_vec_unchecked(rows.collect()))
    }

    fn loss_and_gradient(
        &self,
        theta: &Vector,
        batch: Batch<'_>,
    ) -> Result<(f64, Vector), ProblemError> {
        let g = self.gradient(theta, batch)?;
        // accurate dot products keep difference quotients of f meaningful
        let f = 0.5 * compensated_dot(theta.as_slice(), g.as_slice());
        Ok((f, g))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimum_at_origin() {
        let q = quadratic_problem(7, 30.0, 1).unwrap();
        let (f, g) = q.loss_and_gradient(&Vector::zeros(7), Batch::Full).unwrap();
        assert_eq!(f, 0.0);
        assert!(g.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn scalar_case() {
        let q = quadratic_problem(1, 1.0, 99).unwrap();
        let theta = Vector::from_vec(vec![2.0]).unwrap();
        let (f, g) = q.loss_and_gradient(&theta, Batch::Full).unwrap();
        assert_eq!(f, 2.0);
        assert_eq!(g[0], 2.0);
    }

    #[test]
    fn eigenvalue_endpoints() {
        let q = quadratic_problem(20, 100.0, 3).unwrap();
        let ev = q.eigenvalues();
        assert_eq!(ev[0], 1.0);
        assert_eq!(ev[19], 100.0);
        assert!(ev.windows(2).all(|w| w[1] > w[0]));
        // constant ratio between neighbours
        let r0 = ev[1] / ev[0];
        assert!(ev.windows(2).all(|w| (w[1] / w[0] - r0).abs() < 1e-12));
    }

    #[test]
    fn symmetric() {
        let q = quadratic_problem(6, 10.0, 4).unwrap();
        let a = q.matrix();
        for r in 0..6 {
            for c in 0..6 {
                assert_eq!(a.get(r, c), a.get(c, r));
            }
        }
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(
            quadratic_problem(0, 10.0, 1),
            Err(ProblemError::InvalidDim(_))
        ));
        assert!(matches!(
            quadratic_problem(3, 0.5, 1),
            Err(ProblemError::InvalidDim(_))
        ));
        let q = quadratic_problem(3, 2.0, 1).unwrap();
        assert!(q.loss(&Vector::zeros(2), Batch::Full).is_err());
    }

    #[test]
    fn deterministic_per_seed() {
        let a = quadratic_problem(5, 10.0, 42).unwrap();
        let b = quadratic_problem(5, 10.0, 42).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        assert_eq!(a.initial_point(), b.initial_point());
        assert_ne!(a.matrix(), quadratic_problem(5, 10.0, 43).unwrap().matrix());
    }
}
