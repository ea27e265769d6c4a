//! Conformal classifier two-sample tests for validating approximate
//! posteriors against a sampleable reference posterior.

// `!(x > 0)` is the idiom used throughout to reject NaN along with bad values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod classifier;
pub mod conformal;
pub mod error;
pub mod harness;
pub mod numerics;
pub mod scalar;
pub mod tasks;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Mlp32 = classifier::Mlp<f32>;
pub type Mlp64 = classifier::Mlp<f64>;
pub type PValueBatch64 = conformal::PValueBatch<f64>;
pub type TestOutcome64 = conformal::TestOutcome<f64>;
