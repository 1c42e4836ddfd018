//! Fully connected tanh network with a softmax cross-entropy head.
//!
//! Parameters are flattened layer by layer as `W_l` (row-major,
//! `out × in`) followed by `b_l`.

use super::dataset::{Dataset, Labels, SplitFractions};
use super::{check_theta, Batch, Problem, ProblemError};
use crate::numerics::{compensated_sum, CompensatedSum, Matrix, Rng, Vector};

/// Two interleaved spiral arms (classes 0 and 1) with Gaussian angular noise.
pub fn spiral(n: usize, noise: f64, seed: u64) -> Result<Dataset, ProblemError> {
    if n < 2 {
        return Err(ProblemError::InvalidDim(format!(
            "spiral needs n >= 2, got {n}"
        )));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(ProblemError::InvalidParameter(format!("noise {noise}")));
    }
    let mut rng = Rng::derive(seed, 0x5B);
    let mut data = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    let per_class = [n.div_ceil(2), n / 2];
    for (class, &count) in per_class.iter().enumerate() {
        for i in 0..count {
            let s = (i as f64 + 0.5) / count as f64;
            let angle = 3.0 * std::f64::consts::PI * s
                + class as f64 * std::f64::consts::PI
                + noise * rng.standard_normal();
            data.push(s * libm::cos(angle));
            data.push(s * libm::sin(angle));
            labels.push(class);
        }
    }
    Dataset::new(
        Matrix::from_row_major(n, 2, data).expect("shape"),
        Labels::Classes {
            labels,
            num_classes: 2,
        },
        SplitFractions::default(),
        seed,
    )
}

#[derive(Debug, Clone)]
pub struct Mlp {
    layers: Vec<usize>,
    /// Offset of `W_l` in the flat parameter vector; `b_l` follows it.
    offsets: Vec<usize>,
    dim: usize,
    data: Dataset,
    init: Vector,
}

pub fn mlp_problem(layers: &[usize], data: Dataset, seed: u64) -> Result<Mlp, ProblemError> {
    if layers.len() < 2 || layers.contains(&0) {
        return Err(ProblemError::ShapeMismatch(format!(
            "need at least two non-empty layers, got {layers:?}"
        )));
    }
    if layers[0] != data.num_features() {
        return Err(ProblemError::ShapeMismatch(format!(
            "input layer has {} units but data has {} features",
            layers[0],
            data.num_features()
        )));
    }
    let classes = data.labels().num_classes().ok_or_else(|| {
        ProblemError::ShapeMismatch("classification network needs class labels".into())
    })?;
    let out = *layers.last().expect("non-empty");
    if out != classes {
        return Err(ProblemError::ShapeMismatch(format!(
            "output layer has {out} units but data has {classes} classes"
        )));
    }
    let mut offsets = Vec::with_capacity(layers.len() - 1);
    let mut dim = 0;
    for w in layers.windows(2) {
        offsets.push(dim);
        dim += w[1] * w[0] + w[1];
    }
    // Glorot-style normal weights, zero biases.
    let mut rng = Rng::derive(seed, 0x3A);
    let mut init = vec![0.0; dim];
    for (l, w) in layers.windows(2).enumerate() {
        let std = (2.0 / (w[0] + w[1]) as f64).sqrt();
        for x in &mut init[offsets[l]..offsets[l] + w[0] * w[1]] {
            *x = std * rng.standard_normal();
        }
    }
    Ok(Mlp {
        layers: layers.to_vec(),
        offsets,
        dim,
        data,
        init: Vector::from_vec_unchecked(init),
    })
}

impl Mlp {
    pub fn layers(&self) -> &[usize] {
        &self.layers
    }

    /// Activations of every layer for one input; the last entry holds logits.
    fn forward(&self, theta: &[f64], x: &[f64]) -> Vec<Vec<f64>> {
        let depth = self.layers.len() - 1;
        let mut acts = Vec::with_capacity(depth + 1);
        acts.push(x.to_vec());
        for l in 0..depth {
            let (n_in, n_out) = (self.layers[l], self.layers[l + 1]);
            let w = &theta[self.offsets[l]..self.offsets[l] + n_in * n_out];
            let b = &theta[self.offsets[l] + n_in * n_out..self.offsets[l] + n_in * n_out + n_out];
            let input = &acts[l];
            let z: Vec<f64> = (0..n_out)
                .map(|o| {
                    let row = &w[o * n_in..(o + 1) * n_in];
                    let s: f64 = row.iter().zip(input).map(|(a, b)| a * b).sum();
                    let s = s + b[o];
                    if l + 1 < depth {
                        libm::tanh(s)
                    } else {
                        s
                    }
                })
                .collect();
            acts.push(z);
        }
        acts
    }

    fn class(&self, row: usize) -> usize {
        self.data.labels().class(row).expect("class labels")
    }
}

/// `log Σ exp(z) − z[y]` and the softmax probabilities.
fn cross_entropy(logits: &[f64], y: usize) -> (f64, Vec<f64>) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| libm::exp(z - max)).collect();
    let sum: f64 = exps.iter().sum();
    let loss = max + libm::log(sum) - logits[y];
    (loss, exps.into_iter().map(|e| e / sum).collect())
}

impl Problem for Mlp {
    fn name(&self) -> String {
        format!("mlp({:?})", self.layers)
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn initial_point(&self) -> Vector {
        self.init.clone()
    }

    fn loss(&self, theta: &Vector, batch: Batch<'_>) -> Result<f64, ProblemError> {
        check_theta(theta, self.dim)?;
        let rows = batch.resolve(self.data.len())?;
        let total = compensated_sum(rows.iter().map(|i| {
            let acts = self.forward(theta.as_slice(), self.data.row(i));
            cross_entropy(acts.last().expect("output"), self.class(i)).0
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
        check_theta(theta, self.dim)?;
        let rows = batch.resolve(self.data.len())?;
        let th = theta.as_slice();
        let depth = self.layers.len() - 1;
        let mut grad = vec![0.0; self.dim];
        let mut total = CompensatedSum::default();
        for i in rows.iter() {
            let acts = self.forward(th, self.data.row(i));
            let y = self.class(i);
            let (loss, probs) = cross_entropy(&acts[depth], y);
            total.add(loss);
            // δ at the logits: softmax − one-hot
            let mut delta = probs;
            delta[y] -= 1.0;
            for l in (0..depth).rev() {
                let (n_in, n_out) = (self.layers[l], self.layers[l + 1]);
                let w_off = self.offsets[l];
                let b_off = w_off + n_in * n_out;
                let input = &acts[l];
                for o in 0..n_out {
                    let d = delta[o];
                    let gw = &mut grad[w_off + o * n_in..w_off + (o + 1) * n_in];
                    for (g, a) in gw.iter_mut().zip(input) {
                        *g += d * a;
                    }
                    grad[b_off + o] += d;
                }
                if l > 0 {
                    let w = &th[w_off..b_off];
                    delta = (0..n_in)
                        .map(|j| {
                            let back: f64 = (0..n_out).map(|o| w[o * n_in + j] * delta[o]).sum();
                            back * (1.0 - input[j] * input[j])
                        })
                        .collect();
                }
            }
        }
        let n = rows.len() as f64;
        for g in &mut grad {
            *g /= n;
        }
        Ok((total.value() / n, Vector::from_vec_unchecked(grad)))
    }

    fn accuracy(&self, theta: &Vector, batch: Batch<'_>) -> Option<Result<f64, ProblemError>> {
        Some((|| {
            check_theta(theta, self.dim)?;
            let rows = batch.resolve(self.data.len())?;
            let correct = rows
                .iter()
                .filter(|&i| {
                    let acts = self.forward(theta.as_slice(), self.data.row(i));
                    let logits = acts.last().expect("output");
                    let pred = logits
                        .iter()
                        .enumerate()
                        .fold((0, f64::NEG_INFINITY), |best, (k, &z)| {
                            if z > best.1 {
                                (k, z)
                            } else {
                                best
                            }
                        })
                        .0;
                    pred == self.class(i)
                })
                .count();
            Ok(correct as f64 / rows.len() as f64)
        })())
    }

    fn dataset(&self) -> Option<&Dataset> {
        Some(&self.data)
    }
}
