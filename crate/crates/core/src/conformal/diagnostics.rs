//! Monte-Carlo checks of the expected conformal p-value under the
//! alternative, computed with oracle density-ratio scores.
//!
//! Three estimators of the same limit (as `m → ∞`):
//! - the mean of simulated p-values `U`,
//! - `1 − AUC(r)`,
//! - `½ − ¼ E|r(X) − r(X′)|` with `X, X′ ~ q` i.i.d.

use super::auc::auc_with_se;
use super::uniform::uniform_pvalues;
use crate::classifier::{FnScore, ScoreFunction};
use crate::error::{Error, Result};
use crate::numerics::RngStream;
use crate::scalar::Scalar;
use crate::tasks::{JointSample, TaskPair};

/// A Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub se: T,
}

impl<T: Scalar> Estimate<T> {
    pub fn of_sample(v: &[T]) -> Self {
        let n = T::count(v.len());
        let value = v.iter().copied().sum::<T>() / n;
        let var = if v.len() > 1 {
            v.iter().map(|&x| (x - value) * (x - value)).sum::<T>() / (n - T::one())
        } else {
            T::zero()
        };
        Self {
            value,
            se: (var / n).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PValueDiagnostics<T> {
    pub mean_u: Estimate<T>,
    pub one_minus_auc: Estimate<T>,
    pub ratio_spread: Estimate<T>,
}

fn oracle<T: Scalar, P: TaskPair<T> + ?Sized>(task: &P, x: &JointSample<T>) -> Result<T> {
    task.oracle_log_ratio(x)
        .ok_or_else(|| Error::InvalidParameter(format!("task {} has no oracle ratio", task.name())))
}

/// All three estimators for `task`, using `m` calibration draws per test
/// point and `n` draws per estimator.
pub fn expected_pvalue_diagnostics<T, P>(
    task: &P,
    m: usize,
    n: usize,
    stream: RngStream,
) -> Result<PValueDiagnostics<T>>
where
    T: Scalar,
    P: TaskPair<T> + ?Sized,
{
    if n < 2 {
        return Err(Error::InvalidParameter("diagnostics need n >= 2".into()));
    }
    let probe = task.sample_true(&mut stream.rng());
    oracle(task, &probe)?;
    let score = FnScore(|x: &JointSample<T>| task.oracle_log_ratio(x).unwrap_or_else(T::nan));

    let batch = uniform_pvalues(&score, task, m, n, stream.named("pvalues"))?;
    let mean_u = Estimate::of_sample(&batch.values);

    let mut rng = stream.named("auc").rng();
    let sp: Vec<T> = (0..n)
        .map(|_| score.score(&task.sample_true(&mut rng)))
        .collect();
    let sq: Vec<T> = (0..n)
        .map(|_| score.score(&task.sample_approx(&mut rng)))
        .collect();
    let a = auc_with_se(&sp, &sq)?;
    let one_minus_auc = Estimate {
        value: T::one() - a.auc,
        se: a.se,
    };

    let mut rng = stream.named("spread").rng();
    let quarter = T::of(0.25);
    let terms: Vec<T> = (0..n)
        .map(|_| {
            let r1 = score.score(&task.sample_approx(&mut rng)).exp();
            let r2 = score.score(&task.sample_approx(&mut rng)).exp();
            T::of(0.5) - quarter * (r1 - r2).abs()
        })
        .collect();
    let ratio_spread = Estimate::of_sample(&terms);

    Ok(PValueDiagnostics {
        mean_u,
        one_minus_auc,
        ratio_spread,
    })
}

/// `E[U_b] − E[U_a]`: the shift in mean p-value when score `a` is replaced
/// by `b`, estimated on identical test points, calibration sets and
/// tie-breaks, so the standard error reflects only the paired difference.
pub fn paired_pvalue_shift<T, A, B, P>(
    a: &A,
    b: &B,
    task: &P,
    m: usize,
    n: usize,
    stream: RngStream,
) -> Result<Estimate<T>>
where
    T: Scalar,
    A: ScoreFunction<T> + ?Sized,
    B: ScoreFunction<T> + ?Sized,
    P: TaskPair<T> + ?Sized,
{
    let ua = uniform_pvalues(a, task, m, n, stream)?;
    let ub = uniform_pvalues(b, task, m, n, stream)?;
    let diff: Vec<T> = ua
        .values
        .iter()
        .zip(&ub.values)
        .map(|(&x, &y)| y - x)
        .collect();
    Ok(Estimate::of_sample(&diff))
}
