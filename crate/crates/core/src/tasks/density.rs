//! Closed-form log-densities used by the oracle density ratios.

use statrs::function::gamma::ln_gamma;

use crate::numerics::{forward_substitute, Matrix};
use crate::scalar::Scalar;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

fn log_det_from_chol<T: Scalar>(chol: &Matrix<T>) -> T {
    (0..chol.rows()).map(|i| chol[(i, i)].ln()).sum()
}

fn mahalanobis_sq<T: Scalar>(x: &[T], mean: &[T], chol: &Matrix<T>) -> T {
    let diff: Vec<T> = x.iter().zip(mean).map(|(&a, &b)| a - b).collect();
    forward_substitute(chol, &diff).iter().map(|&v| v * v).sum()
}

/// `log N(x; mean, L Lᵀ)`.
pub fn gaussian_log_pdf<T: Scalar>(x: &[T], mean: &[T], chol: &Matrix<T>) -> T {
    let d = T::count(x.len());
    let half = T::of(0.5);
    -half * mahalanobis_sq(x, mean, chol) - log_det_from_chol(chol) - half * d * T::of(LN_2PI)
}

/// `log t_ν(x; mean, L Lᵀ)`.
pub fn student_log_pdf<T: Scalar>(x: &[T], mean: &[T], chol: &Matrix<T>, nu: T) -> T {
    let d = x.len() as f64;
    let nu64 = nu.to_f64_lossy();
    let norm = ln_gamma((nu64 + d) / 2.0)
        - ln_gamma(nu64 / 2.0)
        - 0.5 * d * (nu64 * std::f64::consts::PI).ln();
    let q = mahalanobis_sq(x, mean, chol);
    T::of(norm) - log_det_from_chol(chol) - T::of((nu64 + d) / 2.0) * (q / nu).ln_1p()
}

/// `log(w_a e^a + w_b e^b)` with zero weights contributing nothing.
pub fn log_mix2<T: Scalar>(w_a: T, a: T, w_b: T, b: T) -> T {
    let terms = [(w_a, a), (w_b, b)];
    let live: Vec<T> = terms
        .iter()
        .filter(|(w, _)| *w > T::zero())
        .map(|&(w, v)| w.ln() + v)
        .collect();
    match live.as_slice() {
        [] => T::neg_infinity(),
        [v] => *v,
        [u, v] => {
            let hi = u.max(*v);
            hi + ((*u - hi).exp() + (*v - hi).exp()).ln()
        }
        _ => unreachable!(),
    }
}
