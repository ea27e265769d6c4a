//! TARP: distances to a random reference point. Under the exact posterior
//! the fraction of posterior draws closer to the reference than the true
//! parameter is uniform, which a KS test checks.

use crate::conformal::TestOutcome;
use crate::error::{Error, Result};
use crate::numerics::{ks_uniformity_test, KsAlternative, KsDecision, RngStream};
use crate::scalar::Scalar;
use crate::tasks::TaskPair;

/// Draws behind the pilot estimate of the prior-predictive θ mean.
pub const TARP_PILOT_DRAWS: usize = 2000;

/// Distribution of the reference points `θ_r`.
#[derive(Debug, Clone, PartialEq)]
pub enum TarpReference<T> {
    /// `θ_r ~ N(center, variance · I)`. Without a center, the mean of θ under
    /// the true joint is estimated from a pilot sample.
    Gaussian { center: Option<Vec<T>>, variance: T },
}

impl<T: Scalar> Default for TarpReference<T> {
    fn default() -> Self {
        TarpReference::Gaussian {
            center: None,
            variance: T::of(2.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TarpConfig<T> {
    pub draws: usize,
    pub reference: TarpReference<T>,
    pub alpha: T,
}

impl<T: Scalar> TarpConfig<T> {
    pub fn new(draws: usize, alpha: T) -> Self {
        Self {
            draws,
            reference: TarpReference::default(),
            alpha,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.draws < 2 {
            return Err(Error::InvalidParameter(
                "TARP needs at least 2 posterior draws".into(),
            ));
        }
        if !(self.alpha > T::zero() && self.alpha < T::one()) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        let TarpReference::Gaussian { variance, .. } = &self.reference;
        if !(*variance > T::zero()) {
            return Err(Error::InvalidParameter(
                "reference variance must be > 0".into(),
            ));
        }
        Ok(())
    }
}

impl<T: Scalar> Default for TarpConfig<T> {
    fn default() -> Self {
        Self::new(200, T::of(0.05))
    }
}

/// Fraction of draws strictly closer to the reference than the truth.
pub fn tarp_coverage<T: Scalar>(draw_distances: &[T], true_distance: T) -> T {
    let closer = draw_distances
        .iter()
        .filter(|&&d| d < true_distance)
        .count();
    T::count(closer) / T::count(draw_distances.len())
}

fn distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum::<T>()
        .sqrt()
}

fn pilot_mean<T: Scalar, P: TaskPair<T> + ?Sized>(task: &P, stream: RngStream) -> Vec<T> {
    let mut rng = stream.rng();
    let mut mean = vec![T::zero(); task.theta_dim()];
    for _ in 0..TARP_PILOT_DRAWS {
        for (m, t) in mean.iter_mut().zip(task.sample_true(&mut rng).theta) {
            *m += t;
        }
    }
    mean.iter()
        .map(|&m| m / T::count(TARP_PILOT_DRAWS))
        .collect()
}

/// Jittered coverage values `(#closer + u)/(L + 1)`, one per observation.
/// Exactly `Unif[0, 1]` when q is the true posterior.
pub fn tarp_coverages<T, P>(
    task: &P,
    n_obs: usize,
    cfg: &TarpConfig<T>,
    stream: RngStream,
) -> Result<Vec<T>>
where
    T: Scalar,
    P: TaskPair<T> + ?Sized,
{
    cfg.validate()?;
    let TarpReference::Gaussian { center, variance } = &cfg.reference;
    let center = match center {
        Some(c) if c.len() != task.theta_dim() => {
            return Err(Error::DimensionMismatch {
                expected: task.theta_dim(),
                got: c.len(),
            })
        }
        Some(c) => c.clone(),
        None => pilot_mean(task, stream.named("pilot")),
    };
    let sd = variance.sqrt();
    let denom = T::count(cfg.draws + 1);
    let obs = stream.named("obs");
    Ok((0..n_obs)
        .map(|i| {
            let mut rng = obs.child(i as u64).rng();
            let y = task.sample_y(&mut rng);
            let truth = task.sample_theta_true(&y, &mut rng);
            let reference: Vec<T> = center
                .iter()
                .map(|&c| c + sd * T::std_normal(&mut rng))
                .collect();
            let d_true = distance(&truth, &reference);
            let closer = (0..cfg.draws)
                .filter(|_| distance(&task.sample_theta_approx(&y, &mut rng), &reference) < d_true)
                .count();
            (T::count(closer) + T::unit(&mut rng)) / denom
        })
        .collect())
}

pub fn tarp_test<T, P>(
    task: &P,
    n_obs: usize,
    cfg: &TarpConfig<T>,
    stream: RngStream,
) -> Result<TestOutcome<T>>
where
    T: Scalar,
    P: TaskPair<T> + ?Sized,
{
    if n_obs == 0 {
        return Err(Error::Empty("TARP observations"));
    }
    let cov = tarp_coverages(task, n_obs, cfg, stream)?;
    let ks = ks_uniformity_test(&cov, cfg.alpha, KsAlternative::TwoSided, KsDecision::Series)?;
    Ok(TestOutcome {
        method: "tarp".to_string(),
        statistic: ks.statistic,
        p_value: ks.p_value,
        reject: ks.reject,
        alpha: cfg.alpha,
        note: None,
    })
}
