use std::cmp::Ordering;

use num_traits::Num;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Conformal p-value of a test score against `m` calibration scores:
///
/// `U = (#{i ≤ m+1 : Sᵢ < S_{m+1}} + ξ · #{i ≤ m+1 : Sᵢ = S_{m+1}}) / (m + 1)`
///
/// where `S_{m+1}` is the test score itself, so the tie count always
/// includes the self-comparison. Exactly `Unif[0, 1]` when the test point is
/// exchangeable with the calibration set.
///
/// Generic over the score and arithmetic types so it can be evaluated in
/// exact rational arithmetic.
pub fn conformal_pvalue<S: PartialOrd, X: Num + Copy + PartialOrd>(
    cal: &[S],
    test: &S,
    xi: X,
) -> Result<X> {
    if cal.is_empty() {
        return Err(Error::Empty("calibration set"));
    }
    if !(xi >= X::zero() && xi <= X::one()) {
        return Err(Error::InvalidParameter(
            "tie-break draw must lie in [0, 1]".into(),
        ));
    }
    if test.partial_cmp(test).is_none() {
        return Err(Error::InvalidParameter(
            "test score is not comparable".into(),
        ));
    }
    let mut below = X::zero();
    // the test point always ties with itself
    let mut ties = X::one();
    let mut denom = X::one();
    for s in cal {
        match s.partial_cmp(test) {
            Some(Ordering::Less) => below = below + X::one(),
            Some(Ordering::Equal) => ties = ties + X::one(),
            Some(Ordering::Greater) => {}
            None => {
                return Err(Error::InvalidParameter(
                    "calibration score is not comparable".into(),
                ))
            }
        }
        denom = denom + X::one();
    }
    Ok((below + xi * ties) / denom)
}

/// The same p-value from precomputed counts (`ties` excludes the self-tie).
pub(crate) fn pvalue_from_counts<T: Scalar>(below: usize, ties: usize, m: usize, xi: T) -> T {
    (T::count(below) + xi * T::count(ties + 1)) / T::count(m + 1)
}

/// A batch of conformal p-values, one per test point.
#[derive(Debug, Clone, PartialEq)]
pub struct PValueBatch<T> {
    pub values: Vec<T>,
    /// Calibration size behind each value.
    pub m: usize,
}

impl<T: Scalar> PValueBatch<T> {
    pub fn new(values: Vec<T>, m: usize) -> Result<Self> {
        if let Some(&v) = values.iter().find(|&&v| !(v >= T::zero() && v <= T::one())) {
            return Err(Error::OutOfRange {
                value: v.to_f64_lossy(),
            });
        }
        Ok(Self { values, m })
    }

    pub fn n_q(&self) -> usize {
        self.values.len()
    }

    pub fn mean(&self) -> T {
        if self.values.is_empty() {
            return T::nan();
        }
        self.values.iter().copied().sum::<T>() / T::count(self.values.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_counts() {
        assert_eq!(conformal_pvalue(&[1.0, 2.0, 3.0], &2.5, 0.0).unwrap(), 0.5);
        assert_eq!(conformal_pvalue(&[2.0, 2.0, 2.0], &2.0, 0.5).unwrap(), 0.5);
        assert_eq!(conformal_pvalue(&[5.0, 6.0], &1.0, 0.0).unwrap(), 0.0);
        // above everything with ξ = 1 reaches 1
        assert_eq!(conformal_pvalue(&[5.0, 6.0], &9.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(conformal_pvalue::<f64, f64>(&[], &1.0, 0.5).is_err());
        assert!(conformal_pvalue(&[1.0], &1.0, 1.5).is_err());
        assert!(conformal_pvalue(&[f64::NAN], &1.0, 0.5).is_err());
        assert!(conformal_pvalue(&[1.0], &f64::NAN, 0.5).is_err());
    }

    #[test]
    fn counts_agree_with_direct() {
        let cal = [0.1, 0.4, 0.4, 0.9];
        let direct: f64 = conformal_pvalue(&cal, &0.4, 0.3).unwrap();
        assert_eq!(pvalue_from_counts(1, 2, 4, 0.3), direct);
    }

    #[test]
    fn batch_validates_range() {
        assert!(PValueBatch::new(vec![0.0, 1.0, 0.5], 3).is_ok());
        assert!(PValueBatch::new(vec![1.2], 3).is_err());
    }
}
