//! EXAdam and baseline optimizers with a deterministic benchmark harness.

// reference values are quoted to the digits the oracle produced
#![allow(clippy::excessive_precision)]

pub mod config;
pub mod conformance;
pub mod harness;
pub mod numerics;
pub mod optim;
pub mod problems;
