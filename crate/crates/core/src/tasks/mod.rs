//! Benchmark pairs of a true and an approximate joint distribution over
//! `x = (θ, y)`.
//!
//! Both joints share the marginal of `y`; they differ only in the conditional
//! of `θ` given `y`. Each pair exposes samplers for both conditionals and,
//! where densities are available in closed form, the oracle log density
//! ratio `log p(θ | y) − log q(θ | y)`.

mod density;
mod gaussian;
mod toy;

use std::fmt;
use std::str::FromStr;

pub use density::{gaussian_log_pdf, log_mix2, student_log_pdf};
pub use gaussian::{GaussianTask, GaussianTaskBuilder, DEFAULT_HEAVY_TAIL_EPS};
pub use toy::{ShiftTask1d, ToyTask, TOY_MEAN_SHIFT};

use crate::error::Error;
use crate::numerics::StreamRng;
use crate::scalar::Scalar;

/// One draw `x = (θ, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSample<T> {
    pub theta: Vec<T>,
    pub y: Vec<T>,
}

impl<T: Scalar> JointSample<T> {
    pub fn new(theta: Vec<T>, y: Vec<T>) -> Self {
        Self { theta, y }
    }

    pub fn dim(&self) -> usize {
        self.theta.len() + self.y.len()
    }

    /// `θ` followed by `y`, the classifier's input layout.
    pub fn features(&self) -> Vec<T> {
        let mut f = Vec::with_capacity(self.dim());
        f.extend_from_slice(&self.theta);
        f.extend_from_slice(&self.y);
        f
    }

    pub fn is_finite(&self) -> bool {
        self.theta.iter().chain(&self.y).all(|v| v.is_finite())
    }
}

/// A matched true/approximate joint distribution pair.
pub trait TaskPair<T: Scalar>: Send + Sync {
    fn name(&self) -> String;

    fn theta_dim(&self) -> usize;

    fn y_dim(&self) -> usize;

    /// Draw from the shared marginal of `y`.
    fn sample_y(&self, rng: &mut StreamRng) -> Vec<T>;

    /// Draw `θ ~ p(θ | y)`.
    fn sample_theta_true(&self, y: &[T], rng: &mut StreamRng) -> Vec<T>;

    /// Draw `θ ~ q(θ | y)`.
    fn sample_theta_approx(&self, y: &[T], rng: &mut StreamRng) -> Vec<T>;

    /// `log p(θ | y) − log q(θ | y)`, when both densities are known.
    fn oracle_log_ratio(&self, x: &JointSample<T>) -> Option<T>;

    /// One draw from the true joint (classifier label 1).
    fn sample_true(&self, rng: &mut StreamRng) -> JointSample<T> {
        let y = self.sample_y(rng);
        let theta = self.sample_theta_true(&y, rng);
        JointSample { theta, y }
    }

    /// One draw from the approximate joint (classifier label 0).
    fn sample_approx(&self, rng: &mut StreamRng) -> JointSample<T> {
        let y = self.sample_y(rng);
        let theta = self.sample_theta_approx(&y, rng);
        JointSample { theta, y }
    }

    fn sample_true_n(&self, n: usize, rng: &mut StreamRng) -> Vec<JointSample<T>> {
        (0..n).map(|_| self.sample_true(rng)).collect()
    }

    fn sample_approx_n(&self, n: usize, rng: &mut StreamRng) -> Vec<JointSample<T>> {
        (0..n).map(|_| self.sample_approx(rng)).collect()
    }
}

/// The six γ-controlled perturbations of the Gaussian reference posterior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PerturbationKind {
    MeanShift,
    CovScaling,
    Anisotropic,
    HeavyTail,
    ExtraMode,
    ModeCollapse,
}

impl PerturbationKind {
    pub const ALL: [PerturbationKind; 6] = [
        PerturbationKind::MeanShift,
        PerturbationKind::CovScaling,
        PerturbationKind::Anisotropic,
        PerturbationKind::HeavyTail,
        PerturbationKind::ExtraMode,
        PerturbationKind::ModeCollapse,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PerturbationKind::MeanShift => "mean_shift",
            PerturbationKind::CovScaling => "cov_scaling",
            PerturbationKind::Anisotropic => "anisotropic",
            PerturbationKind::HeavyTail => "heavy_tail",
            PerturbationKind::ExtraMode => "extra_mode",
            PerturbationKind::ModeCollapse => "mode_collapse",
        }
    }
}

impl fmt::Display for PerturbationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PerturbationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::UnknownKind(s.to_string()))
    }
}

/// Task selector accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TaskKind {
    Gaussian(PerturbationKind),
    Toy,
}

impl TaskKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::Gaussian(k) => k.as_str(),
            TaskKind::Toy => "toy",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        if s == "toy" {
            Ok(TaskKind::Toy)
        } else {
            s.parse().map(TaskKind::Gaussian)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_names_round_trip() {
        for k in PerturbationKind::ALL {
            assert_eq!(k.as_str().parse::<PerturbationKind>().unwrap(), k);
        }
        assert_eq!("toy".parse::<TaskKind>().unwrap(), TaskKind::Toy);
        assert_eq!(
            "heavy_tail".parse::<TaskKind>().unwrap(),
            TaskKind::Gaussian(PerturbationKind::HeavyTail)
        );
    }

    #[test]
    fn unknown_kind() {
        assert_eq!(
            "banana".parse::<TaskKind>(),
            Err(Error::UnknownKind("banana".into()))
        );
    }

    #[test]
    fn features_layout() {
        let x = JointSample::new(vec![1.0, 2.0], vec![3.0]);
        assert_eq!(x.features(), vec![1.0, 2.0, 3.0]);
        assert_eq!(x.dim(), 3);
    }
}
