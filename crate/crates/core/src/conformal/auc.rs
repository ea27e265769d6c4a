use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// AUC estimate with its DeLong standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AucEstimate<T> {
    pub auc: T,
    pub se: T,
}

fn sorted<T: Scalar>(v: &[T]) -> Result<Vec<T>> {
    if v.is_empty() {
        return Err(Error::Empty("AUC scores"));
    }
    if v.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidParameter("AUC scores contain NaN".into()));
    }
    let mut v = v.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("NaN filtered"));
    Ok(v)
}

/// Fraction of `sorted` strictly below `x`, ties counted half.
fn mid_fraction<T: Scalar>(sorted: &[T], x: T) -> T {
    let lt = sorted.partition_point(|&v| v < x);
    let le = sorted.partition_point(|&v| v <= x);
    T::of(0.5) * T::count(lt + le) / T::count(sorted.len())
}

fn mean_and_var<T: Scalar>(v: &[T]) -> (T, T) {
    let n = T::count(v.len());
    let mean = v.iter().copied().sum::<T>() / n;
    if v.len() < 2 {
        return (mean, T::zero());
    }
    let var = v.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>() / (n - T::one());
    (mean, var)
}

/// `P[s(X) > s(X̃)] + ½ P[s(X) = s(X̃)]` over all `n_p · n_q` pairs, with
/// `X` scored in `scores_p` and `X̃` in `scores_q`.
pub fn auc<T: Scalar>(scores_p: &[T], scores_q: &[T]) -> Result<T> {
    Ok(auc_with_se(scores_p, scores_q)?.auc)
}

/// [`auc`] together with the DeLong estimate of its standard error.
pub fn auc_with_se<T: Scalar>(scores_p: &[T], scores_q: &[T]) -> Result<AucEstimate<T>> {
    let sq = sorted(scores_q)?;
    let sp = sorted(scores_p)?;
    // placement values: each p-score's standing among the q-scores and
    // each q-score's among the p-scores
    let v10: Vec<T> = scores_p.iter().map(|&s| mid_fraction(&sq, s)).collect();
    let v01: Vec<T> = scores_q
        .iter()
        .map(|&s| T::one() - mid_fraction(&sp, s))
        .collect();
    let (auc, var10) = mean_and_var(&v10);
    let (_, var01) = mean_and_var(&v01);
    let se = (var10 / T::count(v10.len()) + var01 / T::count(v01.len())).sqrt();
    Ok(AucEstimate { auc, se })
}
