use super::density::{gaussian_log_pdf, log_mix2, student_log_pdf};
use super::{JointSample, PerturbationKind, TaskPair};
use crate::error::{Error, Result};
use crate::numerics::{
    affine_normal, mvn_sample, mvt_sample, std_normal_vec, CorrelationMatrix, Matrix, RngStream,
    StreamRng,
};
use crate::scalar::Scalar;

/// Heavy-tail offset: `ν = 1 / (γ + ε)`, so `ν = 100` at `γ = 0`.
pub const DEFAULT_HEAVY_TAIL_EPS: f64 = 0.01;

/// Gaussian reference posterior with one γ-controlled perturbation.
///
/// `y ~ N(1_k, I_k)` and `p(θ | y) = N(μ_y, Σ)` with `Σ_ij = 0.9^|i−j|`.
/// `μ_y = y` when `s = k`; otherwise `μ_y = A y` for a fixed seeded
/// Gaussian matrix `A` scaled by `1/√k`.
#[derive(Debug, Clone)]
pub struct GaussianTask<T: Scalar> {
    kind: PerturbationKind,
    gamma: T,
    eps: T,
    sigma: CorrelationMatrix<T>,
    link: Option<Matrix<T>>,
    k: usize,
    v_min: Vec<T>,
    /// Cholesky factor of q's covariance for the Gaussian-q kinds.
    approx_chol: Matrix<T>,
    nu: T,
}

#[derive(Debug, Clone)]
pub struct GaussianTaskBuilder {
    kind: PerturbationKind,
    gamma: f64,
    s: usize,
    k: usize,
    eps: f64,
    rho: f64,
    link_seed: u64,
}

impl GaussianTaskBuilder {
    pub fn gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn dims(mut self, s: usize, k: usize) -> Self {
        self.s = s;
        self.k = k;
        self
    }

    pub fn eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn correlation(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn link_seed(mut self, seed: u64) -> Self {
        self.link_seed = seed;
        self
    }

    pub fn build<T: Scalar>(self) -> Result<GaussianTask<T>> {
        let Self {
            kind,
            gamma,
            s,
            k,
            eps,
            rho,
            link_seed,
        } = self;
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "gamma must be >= 0, got {gamma}"
            )));
        }
        if matches!(
            kind,
            PerturbationKind::ExtraMode | PerturbationKind::ModeCollapse
        ) && gamma > 1.0
        {
            return Err(Error::InvalidParameter(format!(
                "{kind} is a mixture weight and needs gamma <= 1, got {gamma}"
            )));
        }
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "eps must be > 0, got {eps}"
            )));
        }
        if s == 0 || k == 0 {
            return Err(Error::InvalidParameter(
                "dimensions must be positive".into(),
            ));
        }
        let sigma = CorrelationMatrix::ar1(s, T::of(rho))?;
        let v_min = sigma.matrix().smallest_eigenvector()?;
        let g = T::of(gamma);
        let approx_chol = match kind {
            PerturbationKind::CovScaling => sigma.cholesky().scale((T::one() + g).sqrt()),
            PerturbationKind::Anisotropic => sigma
                .matrix()
                .add(&Matrix::outer(&v_min).scale(g))?
                .cholesky()?,
            _ => sigma.cholesky().clone(),
        };
        let link = (s != k).then(|| {
            let mut rng = RngStream::new(link_seed, 0x4c49_4e4b).rng();
            let scale = T::of(1.0 / (k as f64).sqrt());
            Matrix::from_fn(s, k, |_, _| T::std_normal(&mut rng) * scale)
        });
        Ok(GaussianTask {
            kind,
            gamma: g,
            eps: T::of(eps),
            sigma,
            link,
            k,
            v_min,
            approx_chol,
            nu: T::one() / (g + T::of(eps)),
        })
    }
}

impl<T: Scalar> GaussianTask<T> {
    /// Builder with the defaults `s = k = 3`, `γ = 0`, `ε = 0.01`, `ρ = 0.9`.
    pub fn builder(kind: PerturbationKind) -> GaussianTaskBuilder {
        GaussianTaskBuilder {
            kind,
            gamma: 0.0,
            s: 3,
            k: 3,
            eps: DEFAULT_HEAVY_TAIL_EPS,
            rho: 0.9,
            link_seed: 0,
        }
    }

    pub fn new(kind: PerturbationKind, gamma: f64) -> Result<Self> {
        Self::builder(kind).gamma(gamma).build()
    }

    pub fn kind(&self) -> PerturbationKind {
        self.kind
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn eps(&self) -> T {
        self.eps
    }

    pub fn sigma(&self) -> &CorrelationMatrix<T> {
        &self.sigma
    }

    pub fn v_min(&self) -> &[T] {
        &self.v_min
    }

    /// Degrees of freedom of the heavy-tailed approximation.
    pub fn nu(&self) -> T {
        self.nu
    }

    pub fn posterior_mean(&self, y: &[T]) -> Vec<T> {
        match &self.link {
            None => y.to_vec(),
            Some(a) => a.mul_vec(y).expect("link matrix matches y dimension"),
        }
    }

    fn normal_at(&self, mean: &[T], chol: &Matrix<T>, rng: &mut StreamRng) -> Vec<T> {
        mvn_sample(mean, chol, rng).expect("task dimensions are consistent")
    }

    /// `w N(−μ, Σ) + (1 − w) N(μ, Σ)`.
    fn mixture_at(&self, w: T, mu: &[T], rng: &mut StreamRng) -> Vec<T> {
        let flip = T::unit(rng) < w;
        let z = std_normal_vec(mu.len(), rng);
        let mean: Vec<T> = if flip {
            mu.iter().map(|&m| -m).collect()
        } else {
            mu.to_vec()
        };
        affine_normal(&mean, self.sigma.cholesky(), &z).expect("task dimensions are consistent")
    }

    fn log_mixture(&self, w: T, theta: &[T], mu: &[T]) -> T {
        let neg: Vec<T> = mu.iter().map(|&m| -m).collect();
        let l = self.sigma.cholesky();
        log_mix2(
            w,
            gaussian_log_pdf(theta, &neg, l),
            T::one() - w,
            gaussian_log_pdf(theta, mu, l),
        )
    }

    pub fn log_p(&self, theta: &[T], y: &[T]) -> T {
        let mu = self.posterior_mean(y);
        match self.kind {
            PerturbationKind::ModeCollapse => self.log_mixture(self.gamma, theta, &mu),
            _ => gaussian_log_pdf(theta, &mu, self.sigma.cholesky()),
        }
    }

    pub fn log_q(&self, theta: &[T], y: &[T]) -> T {
        let mu = self.posterior_mean(y);
        match self.kind {
            PerturbationKind::MeanShift => {
                let shifted: Vec<T> = mu.iter().map(|&m| (T::one() + self.gamma) * m).collect();
                gaussian_log_pdf(theta, &shifted, self.sigma.cholesky())
            }
            PerturbationKind::CovScaling | PerturbationKind::Anisotropic => {
                gaussian_log_pdf(theta, &mu, &self.approx_chol)
            }
            PerturbationKind::HeavyTail => {
                student_log_pdf(theta, &mu, self.sigma.cholesky(), self.nu)
            }
            PerturbationKind::ExtraMode => self.log_mixture(self.gamma, theta, &mu),
            PerturbationKind::ModeCollapse => gaussian_log_pdf(theta, &mu, self.sigma.cholesky()),
        }
    }
}

impl<T: Scalar> TaskPair<T> for GaussianTask<T> {
    fn name(&self) -> String {
        self.kind.as_str().to_string()
    }

    fn theta_dim(&self) -> usize {
        self.sigma.dim()
    }

    fn y_dim(&self) -> usize {
        self.k
    }

    fn sample_y(&self, rng: &mut StreamRng) -> Vec<T> {
        (0..self.k).map(|_| T::one() + T::std_normal(rng)).collect()
    }

    fn sample_theta_true(&self, y: &[T], rng: &mut StreamRng) -> Vec<T> {
        let mu = self.posterior_mean(y);
        match self.kind {
            PerturbationKind::ModeCollapse => self.mixture_at(self.gamma, &mu, rng),
            _ => self.normal_at(&mu, self.sigma.cholesky(), rng),
        }
    }

    fn sample_theta_approx(&self, y: &[T], rng: &mut StreamRng) -> Vec<T> {
        let mu = self.posterior_mean(y);
        match self.kind {
            PerturbationKind::MeanShift => {
                let shifted: Vec<T> = mu.iter().map(|&m| (T::one() + self.gamma) * m).collect();
                self.normal_at(&shifted, self.sigma.cholesky(), rng)
            }
            PerturbationKind::CovScaling | PerturbationKind::Anisotropic => {
                self.normal_at(&mu, &self.approx_chol, rng)
            }
            PerturbationKind::HeavyTail => {
                mvt_sample(&mu, self.sigma.cholesky(), self.nu, rng).expect("ν > 0 by construction")
            }
            PerturbationKind::ExtraMode => self.mixture_at(self.gamma, &mu, rng),
            PerturbationKind::ModeCollapse => self.normal_at(&mu, self.sigma.cholesky(), rng),
        }
    }

    fn oracle_log_ratio(&self, x: &JointSample<T>) -> Option<T> {
        Some(self.log_p(&x.theta, &x.y) - self.log_q(&x.theta, &x.y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_of(v: &[Vec<f64>], d: usize) -> f64 {
        v.iter().map(|x| x[d]).sum::<f64>() / v.len() as f64
    }

    #[test]
    fn rejects_negative_gamma_and_bad_mixture_weight() {
        assert!(GaussianTask::<f64>::new(PerturbationKind::CovScaling, -0.1).is_err());
        assert!(GaussianTask::<f64>::new(PerturbationKind::ExtraMode, 1.5).is_err());
        assert!(GaussianTask::<f64>::builder(PerturbationKind::HeavyTail)
            .eps(0.0)
            .build::<f64>()
            .is_err());
    }

    #[test]
    fn null_log_ratio_is_exactly_zero() {
        let mut rng = RngStream::new(5, 0).rng();
        for kind in PerturbationKind::ALL {
            if kind == PerturbationKind::HeavyTail {
                continue;
            }
            let task = GaussianTask::<f64>::new(kind, 0.0).unwrap();
            for _ in 0..50 {
                let x = task.sample_approx(&mut rng);
                assert_eq!(task.oracle_log_ratio(&x), Some(0.0), "{kind}");
            }
        }
    }

    #[test]
    fn heavy_tail_nu() {
        let t = GaussianTask::<f64>::new(PerturbationKind::HeavyTail, 0.0).unwrap();
        assert!((t.nu() - 100.0).abs() < 1e-9);
        let t = GaussianTask::<f64>::new(PerturbationKind::HeavyTail, 0.99).unwrap();
        assert!((t.nu() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mean_shift_doubles_the_mean() {
        let task = GaussianTask::<f64>::new(PerturbationKind::MeanShift, 1.0).unwrap();
        let mut rng = RngStream::new(9, 1).rng();
        let y = [0.7, 1.4, -0.2];
        let n = 100_000;
        let draws: Vec<Vec<f64>> = (0..n)
            .map(|_| task.sample_theta_approx(&y, &mut rng))
            .collect();
        for d in 0..3 {
            let m = mean_of(&draws, d);
            assert!(
                (m - 2.0 * y[d]).abs() < 4.0 / (n as f64).sqrt(),
                "dim {d}: {m}"
            );
        }
    }

    #[test]
    fn mode_collapse_at_zero_is_centred() {
        let task = GaussianTask::<f64>::new(PerturbationKind::ModeCollapse, 0.0).unwrap();
        let mut rng = RngStream::new(9, 2).rng();
        let y = [1.0, 0.5, 2.0];
        let n = 100_000;
        let draws: Vec<Vec<f64>> = (0..n)
            .map(|_| task.sample_theta_true(&y, &mut rng))
            .collect();
        for d in 0..3 {
            assert!((mean_of(&draws, d) - y[d]).abs() < 4.0 / (n as f64).sqrt());
        }
    }

    #[test]
    fn anisotropic_adds_variance_along_v_min() {
        let task = GaussianTask::<f64>::new(PerturbationKind::Anisotropic, 2.0).unwrap();
        let v = task.v_min().to_vec();
        let base = task.sigma().matrix().rayleigh_quotient(&v).unwrap();
        let mut rng = RngStream::new(1, 1).rng();
        let y = [0.0; 3];
        let n = 50_000;
        let var: f64 = (0..n)
            .map(|_| {
                let t = task.sample_theta_approx(&y, &mut rng);
                let proj: f64 = t.iter().zip(&v).map(|(a, b)| a * b).sum();
                proj * proj
            })
            .sum::<f64>()
            / n as f64;
        let want = base + 2.0;
        assert!((var - want).abs() < 0.05 * want, "{var} vs {want}");
    }

    #[test]
    fn linked_mean_when_dims_differ() {
        let task = GaussianTask::<f64>::builder(PerturbationKind::CovScaling)
            .dims(2, 4)
            .link_seed(3)
            .build::<f64>()
            .unwrap();
        assert_eq!(task.theta_dim(), 2);
        assert_eq!(task.y_dim(), 4);
        let mut rng = RngStream::new(0, 0).rng();
        let x = task.sample_true(&mut rng);
        assert_eq!(x.theta.len(), 2);
        assert_eq!(x.y.len(), 4);
        assert_eq!(task.posterior_mean(&[0.0; 4]), vec![0.0, 0.0]);
    }

    #[test]
    fn cov_scaling_ratio_is_monotone_in_mahalanobis_norm() {
        let task = GaussianTask::<f64>::new(PerturbationKind::CovScaling, 0.5).unwrap();
        let mut rng = RngStream::new(2, 2).rng();
        let l = task.sigma().cholesky().clone();
        let mut pts: Vec<(f64, f64)> = (0..1000)
            .map(|_| {
                let x = task.sample_approx(&mut rng);
                let diff: Vec<f64> = x.theta.iter().zip(&x.y).map(|(a, b)| a - b).collect();
                let z = crate::numerics::forward_substitute(&l, &diff);
                let maha: f64 = z.iter().map(|v| v * v).sum();
                (maha, task.oracle_log_ratio(&x).unwrap())
            })
            .collect();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        // inflated q: the ratio falls as the Mahalanobis norm grows
        assert!(pts.windows(2).all(|w| w[1].1 <= w[0].1));
    }
}
