//! Small dense linear algebra: just enough for Gaussian sampling and
//! densities in dimensions up to about a hundred.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[&[T]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn diagonal(values: &[T]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a + b)
                .collect(),
        })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect())
    }

    /// Outer product `v vᵀ`.
    pub fn outer(v: &[T]) -> Self {
        Self::from_fn(v.len(), v.len(), |i, j| v[i] * v[j])
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).abs())))
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                got: other.rows * other.cols,
            });
        }
        Ok(())
    }

    /// Lower-triangular Cholesky factor `L` with `L Lᵀ = self`.
    pub fn cholesky(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                got: self.cols,
            });
        }
        let n = self.rows;
        let mut l = Self::zeros(n, n);
        for j in 0..n {
            let mut d = self[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > T::zero()) {
                return Err(Error::NotPositiveDefinite {
                    row: j,
                    pivot: d.to_f64_lossy(),
                });
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in (j + 1)..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(l)
    }

    /// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
    /// Returns eigenvalues in ascending order and the matching unit
    /// eigenvectors as the columns of the returned matrix.
    pub fn symmetric_eigen(&self) -> Result<(Vec<T>, Self)> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                got: self.cols,
            });
        }
        const MAX_SWEEPS: usize = 100;
        let n = self.rows;
        let mut a = self.clone();
        let mut v = Self::identity(n);
        let scale = self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
        let tol = T::epsilon() * T::epsilon() * scale * scale * T::count(n * n).max(T::one());

        let mut converged = n < 2;
        for _ in 0..MAX_SWEEPS {
            let off: T = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[(i, j)] * a[(i, j)])
                .sum();
            if off <= tol {
                converged = true;
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    if apq == T::zero() {
                        continue;
                    }
                    let two = T::of(2.0);
                    let theta = (a[(q, q)] - a[(p, p)]) / (two * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }
        if !converged {
            return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| {
            a[(i, i)]
                .partial_cmp(&a[(j, j)])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let values = order.iter().map(|&i| a[(i, i)]).collect();
        let vectors = Self::from_fn(n, n, |r, c| v[(r, order[c])]);
        Ok((values, vectors))
    }

    /// Unit eigenvector for the smallest eigenvalue of a symmetric matrix.
    pub fn smallest_eigenvector(&self) -> Result<Vec<T>> {
        let (_, vectors) = self.symmetric_eigen()?;
        let mut v: Vec<T> = (0..self.rows).map(|r| vectors[(r, 0)]).collect();
        let norm = v.iter().map(|&x| x * x).sum::<T>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        Ok(v)
    }

    /// `vᵀ M v / vᵀ v`.
    pub fn rayleigh_quotient(&self, v: &[T]) -> Result<T> {
        let mv = self.mul_vec(v)?;
        let num: T = v.iter().zip(&mv).map(|(&a, &b)| a * b).sum();
        let den: T = v.iter().map(|&a| a * a).sum();
        Ok(num / den)
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Solves `L x = b` for lower-triangular `L` by forward substitution.
pub fn forward_substitute<T: Scalar>(l: &Matrix<T>, b: &[T]) -> Vec<T> {
    let n = l.rows();
    let mut x = vec![T::zero(); n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    x
}

/// `L z` for lower-triangular `L`, skipping the zero upper half.
pub fn lower_mul_vec<T: Scalar>(l: &Matrix<T>, z: &[T]) -> Vec<T> {
    (0..l.rows())
        .map(|i| (0..=i).map(|k| l[(i, k)] * z[k]).sum())
        .collect()
}

/// Symmetric positive-definite correlation matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix<T> {
    matrix: Matrix<T>,
    chol: Matrix<T>,
}

impl<T: Scalar> CorrelationMatrix<T> {
    pub fn new(matrix: Matrix<T>) -> Result<Self> {
        let tol = T::of(1e-10);
        if !matrix.is_symmetric(tol) {
            return Err(Error::InvalidParameter(
                "correlation matrix must be symmetric".into(),
            ));
        }
        for i in 0..matrix.rows() {
            if (matrix[(i, i)] - T::one()).abs() > tol {
                return Err(Error::InvalidParameter(
                    "correlation matrix must have unit diagonal".into(),
                ));
            }
        }
        let chol = matrix.cholesky()?;
        Ok(Self { matrix, chol })
    }

    /// `Σ_ij = ρ^|i−j|`.
    pub fn ar1(dim: usize, rho: T) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        Self::new(Matrix::from_fn(dim, dim, |i, j| {
            rho.powi(i.abs_diff(j) as i32)
        }))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn cholesky(&self) -> &Matrix<T> {
        &self.chol
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_identity() {
        let i3 = Matrix::<f64>::identity(3);
        assert_eq!(i3.cholesky().unwrap(), i3);
    }

    #[test]
    fn cholesky_two_by_two() {
        let m = Matrix::from_rows(&[&[1.0, 0.9], &[0.9, 1.0]]).unwrap();
        let l = m.cholesky().unwrap();
        let expected = Matrix::from_rows(&[&[1.0, 0.0], &[0.9, 0.19f64.sqrt()]]).unwrap();
        assert!(l.max_abs_diff(&expected).unwrap() < 1e-15);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let m = Matrix::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]).unwrap();
        assert!(matches!(
            m.cholesky(),
            Err(Error::NotPositiveDefinite { row: 1, .. })
        ));
    }

    #[test]
    fn smallest_eigenvector_diagonal() {
        let m = Matrix::<f64>::diagonal(&[1.0, 2.0, 3.0]);
        let v = m.smallest_eigenvector().unwrap();
        assert!((v[0].abs() - 1.0).abs() < 1e-12);
        assert!(v[1].abs() < 1e-12 && v[2].abs() < 1e-12);
    }

    #[test]
    fn smallest_eigenvector_two_by_two() {
        let m = Matrix::<f64>::from_rows(&[&[1.0, 0.9], &[0.9, 1.0]]).unwrap();
        let v = m.smallest_eigenvector().unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v[0].abs() - h).abs() < 1e-12);
        assert!(
            (v[0] + v[1]).abs() < 1e-12,
            "components must have opposite sign"
        );
        assert!((m.rayleigh_quotient(&v).unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn smallest_eigenvector_degenerate_spectrum() {
        let v = Matrix::<f64>::identity(2).smallest_eigenvector().unwrap();
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
        let rq = Matrix::<f64>::identity(2).rayleigh_quotient(&v).unwrap();
        assert!((rq - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ar1_correlation() {
        let c = CorrelationMatrix::<f64>::ar1(3, 0.9).unwrap();
        assert!((c.matrix()[(0, 2)] - 0.81).abs() < 1e-15);
        assert_eq!(c.matrix()[(1, 1)], 1.0);
    }

    #[test]
    fn correlation_rejects_non_unit_diagonal() {
        let m = Matrix::diagonal(&[2.0, 1.0]);
        assert!(CorrelationMatrix::new(m).is_err());
    }

    #[test]
    fn forward_substitution_inverts_lower_mul() {
        let c = CorrelationMatrix::<f64>::ar1(4, 0.9).unwrap();
        let z = [0.3, -1.2, 2.0, 0.7];
        let b = lower_mul_vec(c.cholesky(), &z);
        let back = forward_substitute(c.cholesky(), &b);
        for (a, b) in z.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn works_in_single_precision() {
        let m = Matrix::from_rows(&[&[4.0f32, 2.0], &[2.0, 3.0]]).unwrap();
        let l = m.cholesky().unwrap();
        let back = l.matmul(&l.transpose()).unwrap();
        assert!(back.max_abs_diff(&m).unwrap() < 1e-5);
    }
}
