//! Score functions: deterministic maps from a draw `x = (θ, y)` to a real
//! number, oriented so that large values look like draws from p.

use std::sync::Arc;

use super::mlp::Mlp;
use crate::error::{Error, Result};
use crate::numerics::{fnv1a, mix, RngStream};
use crate::scalar::Scalar;
use crate::tasks::{JointSample, TaskPair, ToyTask};

pub trait ScoreFunction<T: Scalar>: Send + Sync {
    fn score(&self, x: &JointSample<T>) -> T;

    fn score_all(&self, xs: &[JointSample<T>]) -> Vec<T> {
        xs.iter().map(|x| self.score(x)).collect()
    }
}

impl<T: Scalar, S: ScoreFunction<T> + ?Sized> ScoreFunction<T> for &S {
    fn score(&self, x: &JointSample<T>) -> T {
        (**self).score(x)
    }
}

impl<T: Scalar, S: ScoreFunction<T> + ?Sized> ScoreFunction<T> for Box<S> {
    fn score(&self, x: &JointSample<T>) -> T {
        (**self).score(x)
    }
}

impl<T: Scalar, S: ScoreFunction<T> + ?Sized> ScoreFunction<T> for Arc<S> {
    fn score(&self, x: &JointSample<T>) -> T {
        (**self).score(x)
    }
}

/// The classifier's raw logit, i.e. its estimate of `log r(x)`.
#[derive(Debug, Clone)]
pub struct MlpScore<T> {
    model: Mlp<T>,
}

impl<T: Scalar> MlpScore<T> {
    pub fn new(model: Mlp<T>) -> Self {
        Self { model }
    }

    pub fn model(&self) -> &Mlp<T> {
        &self.model
    }
}

impl<T: Scalar> ScoreFunction<T> for MlpScore<T> {
    fn score(&self, x: &JointSample<T>) -> T {
        self.model.logit(&x.features())
    }
}

/// The task's closed-form `log r(x)`.
pub struct OracleScore<P> {
    task: P,
}

impl<P> OracleScore<P> {
    /// Fails if the task has no closed-form density ratio.
    pub fn new<T: Scalar>(task: P) -> Result<Self>
    where
        P: TaskPair<T>,
    {
        let probe = JointSample::new(
            vec![T::zero(); task.theta_dim()],
            vec![T::zero(); task.y_dim()],
        );
        if task.oracle_log_ratio(&probe).is_none() {
            return Err(Error::InvalidParameter(format!(
                "task {} has no oracle ratio",
                task.name()
            )));
        }
        Ok(Self { task })
    }
}

impl<T: Scalar, P: TaskPair<T>> ScoreFunction<T> for OracleScore<P> {
    fn score(&self, x: &JointSample<T>) -> T {
        self.task.oracle_log_ratio(x).unwrap_or_else(T::nan)
    }
}

/// The toy problem's (possibly degraded) linear boundary, oriented towards p.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryScore<T> {
    pub task: ToyTask<T>,
}

impl<T: Scalar> ScoreFunction<T> for BoundaryScore<T> {
    fn score(&self, x: &JointSample<T>) -> T {
        self.task.p_score(x)
    }
}

/// Scores every point identically.
#[derive(Debug, Clone, Copy)]
pub struct ConstantScore<T>(pub T);

impl<T: Scalar> ScoreFunction<T> for ConstantScore<T> {
    fn score(&self, _x: &JointSample<T>) -> T {
        self.0
    }
}

/// Wraps a closure.
pub struct FnScore<F>(pub F);

impl<T: Scalar, F: Fn(&JointSample<T>) -> T + Send + Sync> ScoreFunction<T> for FnScore<F> {
    fn score(&self, x: &JointSample<T>) -> T {
        (self.0)(x)
    }
}

/// Adds `std · δ(x)` to a base score, with `δ(x) ~ N(0, 1)`.
///
/// `δ(x)` is a pure function of the point's bit pattern and the noise
/// stream, so a point always receives the same perturbation and the noisy
/// score stays deterministic without keeping a memo table.
pub struct NoisyScore<S, T> {
    base: S,
    std: T,
    stream: RngStream,
}

impl<S, T: Scalar> NoisyScore<S, T> {
    pub fn new(base: S, std: T, stream: RngStream) -> Result<Self> {
        if !(std >= T::zero()) || !std.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "noise std must be >= 0, got {std}"
            )));
        }
        Ok(Self { base, std, stream })
    }

    pub fn std(&self) -> T {
        self.std
    }

    fn point_key(x: &JointSample<T>) -> u64 {
        x.theta
            .iter()
            .chain(&x.y)
            .fold(fnv1a(&[x.theta.len() as u8]), |h, v| mix(h ^ v.bits()))
    }

    /// The standard-normal draw attached to `x`.
    pub fn noise(&self, x: &JointSample<T>) -> T {
        T::std_normal(&mut self.stream.child(Self::point_key(x)).rng())
    }
}

impl<T: Scalar, S: ScoreFunction<T>> ScoreFunction<T> for NoisyScore<S, T> {
    fn score(&self, x: &JointSample<T>) -> T {
        let clean = self.base.score(x);
        if self.std == T::zero() {
            clean
        } else {
            clean + self.std * self.noise(x)
        }
    }
}
