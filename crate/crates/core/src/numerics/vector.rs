use std::ops::Index;

use serde::{Deserialize, Serialize};

use super::NumericsError;

/// Elementwise binary operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    #[inline]
    fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            BinaryOp::Add => a + b,
            BinaryOp::Sub => a - b,
            BinaryOp::Mul => a * b,
            BinaryOp::Div => a / b,
        }
    }
}

/// Fixed-length buffer of `f64` values.
///
/// The length is fixed at construction. Checked operations refuse to
/// produce NaN or infinite entries; the in-place kernels used on hot paths
/// (`axpy`, `scale`) leave finiteness checking to the caller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    pub fn zeros(len: usize) -> Self {
        Self {
            data: vec![0.0; len],
        }
    }

    pub fn filled(len: usize, value: f64) -> Self {
        Self {
            data: vec![value; len],
        }
    }

    /// Wraps `data`, rejecting non-finite entries.
    pub fn from_vec(data: Vec<f64>) -> Result<Self, NumericsError> {
        if let Some(index) = data.iter().position(|x| !x.is_finite()) {
            return Err(NumericsError::NonFinite { index });
        }
        Ok(Self { data })
    }

    /// Wraps `data` without a finiteness check.
    pub fn from_vec_unchecked(data: Vec<f64>) -> Self {
        Self { data }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.data.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn first_non_finite(&self) -> Option<usize> {
        self.data.iter().position(|x| !x.is_finite())
    }

    pub fn dot(&self, other: &Vector) -> Result<f64, NumericsError> {
        self.check_len(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: f64, x: &Vector) -> Result<(), NumericsError> {
        self.check_len(x)?;
        for (s, xi) in self.data.iter_mut().zip(&x.data) {
            *s += a * xi;
        }
        Ok(())
    }

    pub fn scale(&mut self, a: f64) {
        for s in &mut self.data {
            *s *= a;
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Vector {
        Vector {
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub(crate) fn check_len(&self, other: &Vector) -> Result<(), NumericsError> {
        if self.len() != other.len() {
            return Err(NumericsError::LengthMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(())
    }
}

impl Index<usize> for Vector {
    type Output = f64;

    fn index(&self, index: usize) -> &f64 {
        &self.data[index]
    }
}

impl<'a> IntoIterator for &'a Vector {
    type Item = &'a f64;
    type IntoIter = std::slice::Iter<'a, f64>;

    fn into_iter(self) -> Self::IntoIter {
        self.data.iter()
    }
}

/// Componentwise `op(a[i], b[i])`.
pub fn elementwise(op: BinaryOp, a: &Vector, b: &Vector) -> Result<Vector, NumericsError> {
    a.check_len(b)?;
    let mut out = Vec::with_capacity(a.len());
    for (index, (&x, &y)) in a.data.iter().zip(&b.data).enumerate() {
        if op == BinaryOp::Div && y == 0.0 {
            return Err(NumericsError::DivisionByZero { index });
        }
        let r = op.apply(x, y);
        if !r.is_finite() {
            return Err(NumericsError::NonFinite { index });
        }
        out.push(r);
    }
    Ok(Vector { data: out })
}
