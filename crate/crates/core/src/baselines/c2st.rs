use crate::classifier::ScoreFunction;
use crate::conformal::TestOutcome;
use crate::error::{Error, Result};
use crate::numerics::{std_normal_cdf, std_normal_quantile, RngStream};
use crate::scalar::Scalar;
use crate::tasks::{JointSample, TaskPair};

/// Classical C2ST from held-out logits: accuracy `t̂` of the rule
/// `η > ½ ⇔ logit > 0` on a balanced test set, compared with chance via the
/// asymptotic null `t̂ ~ N(½, 1/(4 n_te))`. One-sided.
pub fn c2st_from_scores<T: Scalar>(
    scores_p: &[T],
    scores_q: &[T],
    alpha: T,
) -> Result<TestOutcome<T>> {
    if scores_p.is_empty() || scores_q.is_empty() {
        return Err(Error::Empty("C2ST test set"));
    }
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let correct = scores_p.iter().filter(|&&s| s > T::zero()).count()
        + scores_q.iter().filter(|&&s| !(s > T::zero())).count();
    let n_te = scores_p.len() + scores_q.len();
    let acc = T::count(correct) / T::count(n_te);
    let z = (acc - T::of(0.5)) * T::of(2.0) * T::count(n_te).sqrt();
    Ok(TestOutcome {
        method: "c2st".to_string(),
        statistic: z,
        p_value: T::one() - std_normal_cdf(z),
        reject: z > std_normal_quantile(T::one() - alpha),
        alpha,
        note: None,
    })
}

pub fn c2st_test<T, S>(
    score: &S,
    p_test: &[JointSample<T>],
    q_test: &[JointSample<T>],
    alpha: T,
) -> Result<TestOutcome<T>>
where
    T: Scalar,
    S: ScoreFunction<T> + ?Sized,
{
    c2st_from_scores(&score.score_all(p_test), &score.score_all(q_test), alpha)
}

/// Draws a balanced test set of `n` points per class and runs the C2ST.
pub fn c2st_test_sampled<T, S, P>(
    score: &S,
    task: &P,
    n: usize,
    alpha: T,
    stream: RngStream,
) -> Result<TestOutcome<T>>
where
    T: Scalar,
    S: ScoreFunction<T> + ?Sized,
    P: TaskPair<T> + ?Sized,
{
    let p = task.sample_true_n(n, &mut stream.child(0).rng());
    let q = task.sample_approx_n(n, &mut stream.child(1).rng());
    c2st_test(score, &p, &q, alpha)
}
