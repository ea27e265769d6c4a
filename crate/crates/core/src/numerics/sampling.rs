//! Gaussian and Student-t draws through a Cholesky factor.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use super::linalg::{lower_mul_vec, Matrix};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub fn std_normal_vec<T: Scalar, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<T> {
    (0..dim).map(|_| T::std_normal(rng)).collect()
}

/// `mean + L z` for a given standard-normal vector `z`.
pub fn affine_normal<T: Scalar>(mean: &[T], chol: &Matrix<T>, z: &[T]) -> Result<Vec<T>> {
    if chol.rows() != mean.len() || z.len() != mean.len() {
        return Err(Error::DimensionMismatch {
            expected: mean.len(),
            got: chol.rows().max(z.len()),
        });
    }
    Ok(lower_mul_vec(chol, z)
        .into_iter()
        .zip(mean)
        .map(|(lz, &m)| m + lz)
        .collect())
}

/// One draw from `N(mean, L Lᵀ)`.
pub fn mvn_sample<T: Scalar, R: Rng + ?Sized>(
    mean: &[T],
    chol: &Matrix<T>,
    rng: &mut R,
) -> Result<Vec<T>> {
    let z = std_normal_vec(mean.len(), rng);
    affine_normal(mean, chol, &z)
}

/// Chi-square draw with `dof` degrees of freedom.
///
/// Integer `dof` is a sum of squared standard normals; fractional `dof` goes
/// through a Gamma(dof/2, 2) draw (Marsaglia–Tsang).
pub fn chi_square<R: Rng + ?Sized>(dof: f64, rng: &mut R) -> Result<f64> {
    if !(dof > 0.0) || !dof.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "degrees of freedom must be positive, got {dof}"
        )));
    }
    if dof.fract() == 0.0 {
        let n = dof as u64;
        Ok((0..n).map(|_| f64::std_normal(rng).powi(2)).sum())
    } else {
        let g = Gamma::new(dof / 2.0, 2.0).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        Ok(g.sample(rng))
    }
}

/// `mean + L z / sqrt(w / dof)` for given normal vector `z` and chi-square
/// draw `w`.
pub fn affine_student<T: Scalar>(
    mean: &[T],
    chol: &Matrix<T>,
    z: &[T],
    w: T,
    dof: T,
) -> Result<Vec<T>> {
    let scale = (w / dof).sqrt().recip();
    let lz = lower_mul_vec(chol, z);
    if lz.len() != mean.len() {
        return Err(Error::DimensionMismatch {
            expected: mean.len(),
            got: lz.len(),
        });
    }
    Ok(lz
        .into_iter()
        .zip(mean)
        .map(|(v, &m)| m + v * scale)
        .collect())
}

/// One draw from the multivariate t distribution `t_dof(mean, L Lᵀ)`.
pub fn mvt_sample<T: Scalar, R: Rng + ?Sized>(
    mean: &[T],
    chol: &Matrix<T>,
    dof: T,
    rng: &mut R,
) -> Result<Vec<T>> {
    if !(dof > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "degrees of freedom must be positive, got {dof}"
        )));
    }
    if chol.rows() != mean.len() {
        return Err(Error::DimensionMismatch {
            expected: mean.len(),
            got: chol.rows(),
        });
    }
    let z = std_normal_vec(mean.len(), rng);
    let w = T::of(chi_square(dof.to_f64_lossy(), rng)?);
    affine_student(mean, chol, &z, w, dof)
}
