//! One-sample Kolmogorov–Smirnov machinery against `Unif[0, 1]`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Which deviations of the empirical CDF count against uniformity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KsAlternative {
    /// `sup |Ĝ(u) − u|`.
    #[default]
    TwoSided,
    /// `sup (Ĝ(u) − u)`: values stochastically smaller than uniform.
    Lower,
}

/// How a KS statistic is turned into a decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KsDecision {
    /// Asymptotic Kolmogorov tail series.
    #[default]
    Series,
    /// Fixed α = 0.05 critical value `1.358 / √n` (two-sided only).
    FixedCritical05,
}

fn sorted_checked<T: Scalar>(values: &[T]) -> Result<Vec<T>> {
    if values.is_empty() {
        return Err(Error::Empty("KS sample"));
    }
    if let Some(&v) = values.iter().find(|&&v| !(v >= T::zero() && v <= T::one())) {
        return Err(Error::OutOfRange {
            value: v.to_f64_lossy(),
        });
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("values checked finite"));
    Ok(v)
}

/// Exact `sup_u |Ĝ(u) − u|` for a sample on `[0, 1]`.
pub fn ks_statistic<T: Scalar>(values: &[T]) -> Result<T> {
    let v = sorted_checked(values)?;
    let n = T::count(v.len());
    Ok(v.iter().enumerate().fold(T::zero(), |d, (i, &x)| {
        let above = T::count(i + 1) / n - x;
        let below = x - T::count(i) / n;
        d.max(above).max(below)
    }))
}

/// Exact `sup_u (Ĝ(u) − u)`.
pub fn ks_statistic_lower<T: Scalar>(values: &[T]) -> Result<T> {
    let v = sorted_checked(values)?;
    let n = T::count(v.len());
    Ok(v.iter()
        .enumerate()
        .fold(T::zero(), |d, (i, &x)| d.max(T::count(i + 1) / n - x)))
}

/// Asymptotic two-sided p-value `2 Σ_{k≥1} (−1)^{k−1} exp(−2k²nD²)`,
/// clamped to `[0, 1]`.
pub fn ks_pvalue<T: Scalar>(d: T, n: usize) -> T {
    let d = d.to_f64_lossy();
    let lambda2 = n as f64 * d * d;
    if lambda2 <= 0.0 {
        return T::one();
    }
    let mut sum = 0.0;
    for k in 1..=100_000u32 {
        let k = f64::from(k);
        let term = (-2.0 * k * k * lambda2).exp();
        sum += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-12 {
            break;
        }
    }
    T::of((2.0 * sum).clamp(0.0, 1.0))
}

/// Asymptotic one-sided (Smirnov) p-value `exp(−2nD⁺²)`.
pub fn ks_pvalue_lower<T: Scalar>(d: T, n: usize) -> T {
    let d = d.to_f64_lossy();
    T::of((-2.0 * n as f64 * d * d).exp().clamp(0.0, 1.0))
}

/// Two-sided critical value at α = 0.05.
pub fn ks_critical_value_05<T: Scalar>(n: usize) -> T {
    T::of(1.358 / (n as f64).sqrt())
}

/// Result of a one-sample uniformity test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult<T> {
    pub statistic: T,
    pub p_value: T,
    pub reject: bool,
}

/// Tests `values ~ Unif[0, 1]` at level `alpha`.
pub fn ks_uniformity_test<T: Scalar>(
    values: &[T],
    alpha: T,
    alternative: KsAlternative,
    decision: KsDecision,
) -> Result<KsResult<T>> {
    let n = values.len();
    let (statistic, p_value) = match alternative {
        KsAlternative::TwoSided => {
            let d = ks_statistic(values)?;
            (d, ks_pvalue(d, n))
        }
        KsAlternative::Lower => {
            let d = ks_statistic_lower(values)?;
            (d, ks_pvalue_lower(d, n))
        }
    };
    let reject = match decision {
        KsDecision::Series => p_value <= alpha,
        KsDecision::FixedCritical05 => statistic > ks_critical_value_05(n),
    };
    Ok(KsResult {
        statistic,
        p_value,
        reject,
    })
}

/// Two-sample KS statistic `sup |F̂_a − F̂_b|` with its asymptotic p-value
/// (effective size `n_a n_b / (n_a + n_b)`).
pub fn ks_two_sample<T: Scalar>(a: &[T], b: &[T]) -> Result<(T, T)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("two-sample KS"));
    }
    let sort = |v: &[T]| {
        let mut v = v.to_vec();
        v.sort_by(|x, y| x.partial_cmp(y).expect("finite sample"));
        v
    };
    let (a, b) = (sort(a), sort(b));
    let (na, nb) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d = T::zero();
    while i < na && j < nb {
        let x = a[i].min(b[j]);
        while i < na && a[i] <= x {
            i += 1;
        }
        while j < nb && b[j] <= x {
            j += 1;
        }
        let diff = (T::count(i) / T::count(na) - T::count(j) / T::count(nb)).abs();
        d = d.max(diff);
    }
    let n_eff = (na * nb) as f64 / (na + nb) as f64;
    let p = ks_pvalue(T::of(n_eff.sqrt() * d.to_f64_lossy()), 1);
    Ok((d, p))
}
