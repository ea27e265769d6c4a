//! Simulation-based calibration: per-margin ranks of the true parameter
//! among approximate-posterior draws, KS-tested for uniformity with a
//! Bonferroni correction across margins.

use crate::conformal::TestOutcome;
use crate::error::{Error, Result};
use crate::numerics::{ks_uniformity_test, KsAlternative, KsDecision, RngStream};
use crate::scalar::Scalar;
use crate::tasks::TaskPair;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SbcConfig<T> {
    /// Approximate-posterior draws per observation.
    pub draws: usize,
    pub alpha: T,
}

impl<T: Scalar> SbcConfig<T> {
    pub fn new(draws: usize, alpha: T) -> Self {
        Self { draws, alpha }
    }

    pub fn validate(&self) -> Result<()> {
        if self.draws < 2 {
            return Err(Error::InvalidParameter(
                "SBC needs at least 2 posterior draws".into(),
            ));
        }
        if !(self.alpha > T::zero() && self.alpha < T::one()) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

impl<T: Scalar> Default for SbcConfig<T> {
    fn default() -> Self {
        Self::new(200, T::of(0.05))
    }
}

/// `#{i : samples[i] < truth}`.
pub fn sbc_rank<T: Scalar>(samples: &[T], truth: T) -> usize {
    samples.iter().filter(|&&s| s < truth).count()
}

/// Ranks `r_d ∈ {0, …, L}` of each observation's true parameter, one row per
/// observation and one column per θ-dimension. Observation `i` uses
/// `stream.child(i)`.
pub fn sbc_ranks<T, P>(task: &P, n_obs: usize, draws: usize, stream: RngStream) -> Vec<Vec<usize>>
where
    T: Scalar,
    P: TaskPair<T> + ?Sized,
{
    let s = task.theta_dim();
    (0..n_obs)
        .map(|i| {
            let mut rng = stream.child(i as u64).rng();
            let y = task.sample_y(&mut rng);
            let truth = task.sample_theta_true(&y, &mut rng);
            let mut ranks = vec![0; s];
            for _ in 0..draws {
                let theta = task.sample_theta_approx(&y, &mut rng);
                for (r, (&t, &star)) in ranks.iter_mut().zip(theta.iter().zip(&truth)) {
                    if t < star {
                        *r += 1;
                    }
                }
            }
            ranks
        })
        .collect()
}

/// SBC over `n_obs` observations. The statistic is the largest per-margin
/// KS distance and the p-value is Bonferroni-adjusted, `min(1, s · min_d p_d)`,
/// so the test rejects when some margin has `p_d ≤ α / s`.
pub fn sbc_test<T, P>(
    task: &P,
    n_obs: usize,
    cfg: &SbcConfig<T>,
    stream: RngStream,
) -> Result<TestOutcome<T>>
where
    T: Scalar,
    P: TaskPair<T> + ?Sized,
{
    cfg.validate()?;
    if n_obs == 0 {
        return Err(Error::Empty("SBC observations"));
    }
    let ranks = sbc_ranks(task, n_obs, cfg.draws, stream.named("ranks"));
    let s = task.theta_dim();
    let mut jitter = stream.named("jitter").rng();
    let denom = T::count(cfg.draws + 1);
    let mut columns = vec![Vec::with_capacity(n_obs); s];
    for row in &ranks {
        for (col, &r) in columns.iter_mut().zip(row) {
            col.push((T::count(r) + T::unit(&mut jitter)) / denom);
        }
    }
    let mut max_d = T::zero();
    let mut min_p = T::one();
    for col in &columns {
        let ks = ks_uniformity_test(col, cfg.alpha, KsAlternative::TwoSided, KsDecision::Series)?;
        max_d = max_d.max(ks.statistic);
        min_p = min_p.min(ks.p_value);
    }
    let adjusted = (min_p * T::count(s)).min(T::one());
    Ok(TestOutcome {
        method: "sbc".to_string(),
        statistic: max_d,
        p_value: adjusted,
        reject: adjusted <= cfg.alpha,
        alpha: cfg.alpha,
        note: None,
    })
}
