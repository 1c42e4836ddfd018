use super::dataset::{Dataset, Labels, SplitFractions};
use super::{check_theta, Batch, Problem, ProblemError};
use crate::numerics::{compensated_sum, CompensatedSum, Matrix, Rng, Vector};

/// Two unit-variance Gaussian clouds in `d` dimensions whose means sit at
/// `±separation/2` along the diagonal direction. Classes alternate, so the
/// data is balanced.
pub fn gaussian_clouds(
    n: usize,
    d: usize,
    separation: f64,
    seed: u64,
) -> Result<Dataset, ProblemError> {
    if n < 2 || d == 0 {
        return Err(ProblemError::InvalidDim(format!(
            "need n >= 2 and d >= 1, got n={n}, d={d}"
        )));
    }
    if !(separation >= 0.0 && separation.is_finite()) {
        return Err(ProblemError::InvalidParameter(format!(
            "separation {separation}"
        )));
    }
    let offset = 0.5 * separation / (d as f64).sqrt();
    let mut rng = Rng::derive(seed, 0x1C);
    let mut data = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % 2;
        let sign = if class == 1 { 1.0 } else { -1.0 };
        for _ in 0..d {
            data.push(sign * offset + rng.standard_normal());
        }
        labels.push(class);
    }
    Dataset::new(
        Matrix::from_row_major(n, d, data).expect("shape"),
        Labels::Classes {
            labels,
            num_classes: 2,
        },
        SplitFractions::default(),
        seed,
    )
}

/// Binary logistic regression: mean cross-entropy of `σ(wᵀx + b)`.
/// Parameters are `[w_0 … w_{d−1}, b]`.
#[derive(Debug, Clone)]
pub struct LogisticRegression {
    data: Dataset,
}

pub fn logistic_regression_problem(
    n: usize,
    d: usize,
    separation: f64,
    seed: u64,
) -> Result<LogisticRegression, ProblemError> {
    LogisticRegression::new(gaussian_clouds(n, d, separation, seed)?)
}

/// `log(1 + eᶻ)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + libm::log1p(libm::exp(-z.abs()))
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

impl LogisticRegression {
    pub fn new(data: Dataset) -> Result<Self, ProblemError> {
        if data.labels().num_classes() != Some(2) {
            return Err(ProblemError::ShapeMismatch(
                "logistic regression needs exactly two classes".into(),
            ));
        }
        Ok(Self { data })
    }

    fn logit(&self, theta: &Vector, row: usize) -> f64 {
        let d = self.data.num_features();
        let x = self.data.row(row);
        x.iter()
            .zip(&theta.as_slice()[..d])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            + theta[d]
    }

    fn label(&self, row: usize) -> f64 {
        self.data.labels().class(row).expect("class labels") as f64
    }
}

impl Problem for LogisticRegression {
    fn name(&self) -> String {
        format!(
            "logistic(n={}, d={})",
            self.data.len(),
            self.data.num_features()
        )
    }

    fn dim(&self) -> usize {
        self.data.num_features() + 1
    }

    fn initial_point(&self) -> Vector {
        Vector::zeros(self.dim())
    }

    fn loss(&self, theta: &Vector, batch: Batch<'_>) -> Result<f64, ProblemError> {
        check_theta(theta, self.dim())?;
        let rows = batch.resolve(self.data.len())?;
        let total = compensated_sum(rows.iter().map(|i| {
            let z = self.logit(theta, i);
            softplus(z) - self.label(i) * z
        }));
        Ok(total / rows.len() as f64)
    }

    fn gradient(&self, theta: &Vector, batch: Batch<'_>) -> Result<Vector, ProblemError> {
        Ok(self.loss_and_gradient(theta, batch)?.1)
    }

    fn loss_and_gradient(
        &self,
        theta: &Vector,
        batch: Batch<'_>,
    ) -> Result<(f64, Vector), ProblemError> {
        check_theta(theta, self.dim())?;
        let rows = batch.resolve(self.data.len())?;
        let d = self.data.num_features();
        let mut g = vec![0.0; d + 1];
        let mut total = CompensatedSum::default();
        for i in rows.iter() {
            let z = self.logit(theta, i);
            let y = self.label(i);
            total.add(softplus(z) - y * z);
            let r = sigmoid(z) - y;
            for (gj, xj) in g.iter_mut().zip(self.data.row(i)) {
                *gj += r * xj;
            }
            g[d] += r;
        }
        let n = rows.len() as f64;
        for gj in &mut g {
            *gj /= n;
        }
        Ok((total.value() / n, Vector::from_vec_unchecked(g)))
    }

    fn accuracy(&self, theta: &Vector, batch: Batch<'_>) -> Option<Result<f64, ProblemError>> {
        Some((|| {
            check_theta(theta, self.dim())?;
            let rows = batch.resolve(self.data.len())?;
            let correct = rows
                .iter()
                .filter(|&i| (self.logit(theta, i) > 0.0) == (self.label(i) == 1.0))
                .count();
            Ok(correct as f64 / rows.len() as f64)
        })())
    }

    fn dataset(&self) -> Option<&Dataset> {
        Some(&self.data)
    }
}
