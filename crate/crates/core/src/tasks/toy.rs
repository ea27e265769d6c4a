use super::{JointSample, TaskPair};
use crate::error::{Error, Result};
use crate::numerics::StreamRng;
use crate::scalar::Scalar;

/// Shift of q's θ-mean in the toy problem.
pub const TOY_MEAN_SHIFT: f64 = 0.5;

/// Bivariate toy problem: `p = N(0, I₂)` and `q = N((0.5, 0), I₂)` over
/// `(θ, y)`, scored by a (possibly misplaced) linear boundary.
///
/// The optimal boundary is `θ = 0.25`. Degradations rotate it by `rot_beta`
/// about `(0.25, 0)` and then translate it by `shift_c` along θ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyTask<T> {
    pub shift_c: T,
    pub rot_beta: T,
}

impl<T: Scalar> Default for ToyTask<T> {
    fn default() -> Self {
        Self {
            shift_c: T::zero(),
            rot_beta: T::zero(),
        }
    }
}

impl<T: Scalar> ToyTask<T> {
    pub fn new(shift_c: T, rot_beta: T) -> Self {
        Self { shift_c, rot_beta }
    }

    pub fn mean_shift(&self) -> T {
        T::of(TOY_MEAN_SHIFT)
    }

    /// Signed distance to the degraded boundary,
    /// `(θ − 0.25 − c) cos β + y sin β`; positive on q's side.
    pub fn toy_score(&self, x: &JointSample<T>) -> T {
        let midpoint = T::of(TOY_MEAN_SHIFT / 2.0);
        (x.theta[0] - midpoint - self.shift_c) * self.rot_beta.cos() + x.y[0] * self.rot_beta.sin()
    }

    /// The boundary score oriented towards p, the convention every test in
    /// this crate expects (large scores look like draws from p).
    pub fn p_score(&self, x: &JointSample<T>) -> T {
        -self.toy_score(x)
    }
}

impl<T: Scalar> TaskPair<T> for ToyTask<T> {
    fn name(&self) -> String {
        "toy".to_string()
    }

    fn theta_dim(&self) -> usize {
        1
    }

    fn y_dim(&self) -> usize {
        1
    }

    fn sample_y(&self, rng: &mut StreamRng) -> Vec<T> {
        vec![T::std_normal(rng)]
    }

    fn sample_theta_true(&self, _y: &[T], rng: &mut StreamRng) -> Vec<T> {
        vec![T::std_normal(rng)]
    }

    fn sample_theta_approx(&self, _y: &[T], rng: &mut StreamRng) -> Vec<T> {
        vec![self.mean_shift() + T::std_normal(rng)]
    }

    /// `(δ² − 2δθ) / 2` with `δ = 0.5`.
    fn oracle_log_ratio(&self, x: &JointSample<T>) -> Option<T> {
        let d = self.mean_shift();
        Some((d * d - T::of(2.0) * d * x.theta[0]) / T::of(2.0))
    }
}

/// One-dimensional location pair `p = N(0, 1)`, `q = N(δ, 1)` with no
/// conditioning variable. Its AUC and total variation are closed-form:
/// `AUC(r) = Φ(δ/√2)` and `TV = 2Φ(δ/2) − 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftTask1d<T> {
    delta: T,
}

impl<T: Scalar> ShiftTask1d<T> {
    pub fn new(delta: T) -> Result<Self> {
        if !delta.is_finite() {
            return Err(Error::InvalidParameter("shift must be finite".into()));
        }
        Ok(Self { delta })
    }

    pub fn delta(&self) -> T {
        self.delta
    }
}

impl<T: Scalar> TaskPair<T> for ShiftTask1d<T> {
    fn name(&self) -> String {
        "shift1d".to_string()
    }

    fn theta_dim(&self) -> usize {
        1
    }

    fn y_dim(&self) -> usize {
        0
    }

    fn sample_y(&self, _rng: &mut StreamRng) -> Vec<T> {
        Vec::new()
    }

    fn sample_theta_true(&self, _y: &[T], rng: &mut StreamRng) -> Vec<T> {
        vec![T::std_normal(rng)]
    }

    fn sample_theta_approx(&self, _y: &[T], rng: &mut StreamRng) -> Vec<T> {
        vec![self.delta + T::std_normal(rng)]
    }

    fn oracle_log_ratio(&self, x: &JointSample<T>) -> Option<T> {
        let d = self.delta;
        Some((d * d - T::of(2.0) * d * x.theta[0]) / T::of(2.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RngStream;

    fn pt(theta: f64, y: f64) -> JointSample<f64> {
        JointSample::new(vec![theta], vec![y])
    }

    #[test]
    fn optimal_boundary() {
        let t = ToyTask::<f64>::default();
        assert_eq!(t.toy_score(&pt(0.25, 7.0)), 0.0);
        assert_eq!(t.toy_score(&pt(1.25, 0.0)), 1.0);
    }

    #[test]
    fn translated_boundary() {
        let t = ToyTask::new(0.5, 0.0);
        assert_eq!(t.toy_score(&pt(0.75, -2.0)), 0.0);
    }

    #[test]
    fn orthogonal_boundary_scores_y() {
        let t = ToyTask::new(0.0, std::f64::consts::FRAC_PI_2);
        for (th, y) in [(0.0, 1.0), (3.0, -0.5), (-2.0, 0.25)] {
            assert!((t.toy_score(&pt(th, y)) - y).abs() < 1e-15);
        }
    }

    #[test]
    fn shift1d_log_ratio_spot_value() {
        let t = ShiftTask1d::new(0.5).unwrap();
        let x = JointSample::new(vec![0.0], vec![]);
        assert_eq!(t.oracle_log_ratio(&x), Some(0.125));
    }

    #[test]
    fn toy_means() {
        let t = ToyTask::<f64>::default();
        let mut rng = RngStream::new(4, 4).rng();
        let n = 100_000;
        let (mut tp, mut tq, mut yq) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            tp += t.sample_true(&mut rng).theta[0];
            let q = t.sample_approx(&mut rng);
            tq += q.theta[0];
            yq += q.y[0];
        }
        let tol = 4.0 / (n as f64).sqrt();
        assert!((tp / n as f64).abs() < tol);
        assert!((tq / n as f64 - 0.5).abs() < tol);
        assert!((yq / n as f64).abs() < tol);
    }
}
