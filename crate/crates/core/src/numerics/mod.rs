//! Flat numeric buffers, elementwise kernels and the seeded generator.

mod matrix;
mod rng;
mod sum;
mod vector;

pub use matrix::Matrix;
pub use rng::{gaussian, Rng, SplitMix64};
pub use sum::{compensated_dot, compensated_sum, CompensatedSum};
pub use vector::{elementwise, BinaryOp, Vector};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumericsError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("division by zero at index {index}")]
    DivisionByZero { index: usize },
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },
    #[error("invalid standard deviation {0}")]
    InvalidStd(f64),
    #[error("length must be at least 1")]
    EmptyLength,
}
