//! The multiple test: every test point is ranked against one shared
//! calibration set, and the mean p-value is studentized.

use super::pvalue::PValueBatch;
use super::TestOutcome;
use crate::classifier::ScoreFunction;
use crate::error::{Error, Result};
use crate::numerics::{std_normal_cdf, std_normal_quantile, RngStream};
use crate::scalar::Scalar;
use crate::tasks::TaskPair;

/// Number of entries of the sorted slice strictly below / not above `x`.
fn rank_bounds<T: Scalar>(sorted: &[T], x: T) -> (usize, usize) {
    (
        sorted.partition_point(|&v| v < x),
        sorted.partition_point(|&v| v <= x),
    )
}

fn sorted_finite<T: Scalar>(v: &[T], what: &'static str) -> Result<Vec<T>> {
    if v.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidParameter(format!("{what} contain NaN")));
    }
    let mut v = v.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("NaN filtered"));
    Ok(v)
}

/// Shared-calibration p-values and the studentized statistic
///
/// `T̂ = (½ − mean Ûⱼ) / (σ̂ / √n_p)`, `σ̂² = σ̂₁² + n_p / (12 n_q)`,
///
/// with `Ûⱼ = (#{i : r̂(Xᵢ) < r̂(X̃ⱼ)} + ξⱼ #{i : r̂(Xᵢ) = r̂(X̃ⱼ)}) / n_p`
/// (no self term) and `σ̂₁²` the empirical variance of the mid-ECDF of the
/// q-scores evaluated at each p-score. `T̂` is asymptotically `N(0, 1)`
/// under the null and grows under the alternative, so the test rejects
/// one-sided when `T̂ > Φ⁻¹(1 − α)`.
pub fn multiple_test<T: Scalar>(
    scores_p: &[T],
    scores_q: &[T],
    xi: &[T],
    alpha: T,
) -> Result<(PValueBatch<T>, TestOutcome<T>)> {
    let (n_p, n_q) = (scores_p.len(), scores_q.len());
    if n_p < 2 || n_q < 2 {
        return Err(Error::InvalidParameter(
            "multiple test needs n_p, n_q >= 2".into(),
        ));
    }
    if xi.len() != n_q {
        return Err(Error::DimensionMismatch {
            expected: n_q,
            got: xi.len(),
        });
    }
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let sp = sorted_finite(scores_p, "p-scores")?;
    let sq = sorted_finite(scores_q, "q-scores")?;
    let np = T::count(n_p);
    let nq = T::count(n_q);

    let mut u_hat = Vec::with_capacity(n_q);
    for (&s, &x) in scores_q.iter().zip(xi) {
        let (lt, le) = rank_bounds(&sp, s);
        u_hat.push((T::count(lt) + x * T::count(le - lt)) / np);
    }
    let mean_u = u_hat.iter().copied().sum::<T>() / nq;

    let half = T::of(0.5);
    let mid_ecdf: Vec<T> = scores_p
        .iter()
        .map(|&s| {
            let (lt, le) = rank_bounds(&sq, s);
            half * (T::count(lt) + T::count(le)) / nq
        })
        .collect();
    let f_mean = mid_ecdf.iter().copied().sum::<T>() / np;
    let sigma1_sq = mid_ecdf
        .iter()
        .map(|&f| (f - f_mean) * (f - f_mean))
        .sum::<T>()
        / np;
    let sigma = (sigma1_sq + np / (T::of(12.0) * nq)).sqrt();

    let method = "conformal_multiple".to_string();
    let batch = PValueBatch::new(u_hat, n_p)?;
    if !(sigma > T::zero()) || !sigma.is_finite() {
        log::warn!("multiple test: degenerate variance estimate {sigma}; not rejecting");
        return Ok((
            batch,
            TestOutcome {
                method,
                statistic: T::zero(),
                p_value: T::one(),
                reject: false,
                alpha,
                note: Some("degenerate variance estimate".into()),
            },
        ));
    }
    let t_hat = (half - mean_u) / (sigma / np.sqrt());
    let outcome = TestOutcome {
        method,
        statistic: t_hat,
        p_value: T::one() - std_normal_cdf(t_hat),
        reject: t_hat > std_normal_quantile(T::one() - alpha),
        alpha,
        note: None,
    };
    Ok((batch, outcome))
}

/// Draws `n_p` points from p, `n_q` from q and their tie-breaks, scores
/// them and runs [`multiple_test`].
pub fn multiple_test_sampled<T, S, P>(
    score: &S,
    task: &P,
    n_p: usize,
    n_q: usize,
    alpha: T,
    stream: RngStream,
) -> Result<(PValueBatch<T>, TestOutcome<T>)>
where
    T: Scalar,
    S: ScoreFunction<T> + ?Sized,
    P: TaskPair<T> + ?Sized,
{
    let mut rng_p = stream.child(0).rng();
    let mut rng_q = stream.child(1).rng();
    let sp: Vec<T> = (0..n_p)
        .map(|_| score.score(&task.sample_true(&mut rng_p)))
        .collect();
    let mut sq = Vec::with_capacity(n_q);
    let mut xi = Vec::with_capacity(n_q);
    for _ in 0..n_q {
        sq.push(score.score(&task.sample_approx(&mut rng_q)));
        xi.push(T::unit(&mut rng_q));
    }
    multiple_test(&sp, &sq, &xi, alpha)
}
