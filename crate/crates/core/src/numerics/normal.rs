//! Standard normal distribution function and quantile.

use statrs::function::erf;

use crate::scalar::Scalar;

/// Φ(z).
pub fn std_normal_cdf<T: Scalar>(z: T) -> T {
    T::of(0.5 * erf::erfc(-z.to_f64_lossy() / std::f64::consts::SQRT_2))
}

/// Φ⁻¹(p) for `p ∈ (0, 1)`; returns ∓∞ at the endpoints.
pub fn std_normal_quantile<T: Scalar>(p: T) -> T {
    let p = p.to_f64_lossy();
    if p <= 0.0 {
        return T::neg_infinity();
    }
    if p >= 1.0 {
        return T::infinity();
    }
    let z = -std::f64::consts::SQRT_2 * erf::erfc_inv(2.0 * p);
    // one Newton step on Φ(z) = p
    let density = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let cdf = 0.5 * erf::erfc(-z / std::f64::consts::SQRT_2);
    T::of(z - (cdf - p) / density)
}
