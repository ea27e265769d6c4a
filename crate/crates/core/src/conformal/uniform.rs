//! The uniform test: one fresh calibration set per test point, p-values
//! aggregated by a one-sample KS test.

use super::pvalue::{pvalue_from_counts, PValueBatch};
use super::TestOutcome;
use crate::classifier::ScoreFunction;
use crate::error::{Error, Result};
use crate::numerics::{ks_uniformity_test, KsAlternative, KsDecision, RngStream};
use crate::scalar::Scalar;
use crate::tasks::TaskPair;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformTestConfig<T> {
    /// Calibration draws from p per test point.
    pub m: usize,
    /// Test points from q.
    pub n_q: usize,
    pub alpha: T,
    pub alternative: KsAlternative,
    pub decision: KsDecision,
}

impl<T: Scalar> UniformTestConfig<T> {
    pub fn new(m: usize, n_q: usize, alpha: T) -> Self {
        Self {
            m,
            n_q,
            alpha,
            alternative: KsAlternative::TwoSided,
            decision: KsDecision::Series,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n_q == 0 {
            return Err(Error::InvalidParameter(
                "uniform test needs m >= 1 and n_q >= 1".into(),
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

/// Conformal p-values of `n_q` test points from q, each ranked against its
/// own `m` fresh draws from p.
///
/// Test point `j` takes everything it needs (the test draw, its calibration
/// set and its tie-break `ξⱼ`) from `stream.child(j)`, so batches are
/// reproducible and independent across points.
pub fn uniform_pvalues<T, S, P>(
    score: &S,
    task: &P,
    m: usize,
    n_q: usize,
    stream: RngStream,
) -> Result<PValueBatch<T>>
where
    T: Scalar,
    S: ScoreFunction<T> + ?Sized,
    P: TaskPair<T> + ?Sized,
{
    if m == 0 || n_q == 0 {
        return Err(Error::InvalidParameter(
            "uniform test needs m >= 1 and n_q >= 1".into(),
        ));
    }
    let mut values = Vec::with_capacity(n_q);
    for j in 0..n_q {
        let mut rng = stream.child(j as u64).rng();
        let test = score.score(&task.sample_approx(&mut rng));
        let (mut below, mut ties) = (0, 0);
        for _ in 0..m {
            let s = score.score(&task.sample_true(&mut rng));
            if s < test {
                below += 1;
            } else if s == test {
                ties += 1;
            } else if s.is_nan() || test.is_nan() {
                return Err(Error::InvalidParameter(
                    "score function returned NaN".into(),
                ));
            }
        }
        let xi = T::unit(&mut rng);
        values.push(pvalue_from_counts(below, ties, m, xi));
    }
    PValueBatch::new(values, m)
}

/// Runs the uniform test and returns its p-values and decision.
pub fn uniform_test<T, S, P>(
    score: &S,
    task: &P,
    cfg: &UniformTestConfig<T>,
    stream: RngStream,
) -> Result<(PValueBatch<T>, TestOutcome<T>)>
where
    T: Scalar,
    S: ScoreFunction<T> + ?Sized,
    P: TaskPair<T> + ?Sized,
{
    cfg.validate()?;
    let batch = uniform_pvalues(score, task, cfg.m, cfg.n_q, stream)?;
    let outcome = ks_outcome(&batch, cfg)?;
    Ok((batch, outcome))
}

/// KS decision for an existing batch of p-values.
pub fn ks_outcome<T: Scalar>(
    batch: &PValueBatch<T>,
    cfg: &UniformTestConfig<T>,
) -> Result<TestOutcome<T>> {
    let ks = ks_uniformity_test(&batch.values, cfg.alpha, cfg.alternative, cfg.decision)?;
    Ok(TestOutcome {
        method: format!("conformal_uniform({})", batch.m),
        statistic: ks.statistic,
        p_value: ks.p_value,
        reject: ks.reject,
        alpha: cfg.alpha,
        note: None,
    })
}
