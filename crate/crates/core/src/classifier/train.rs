//! Adam training of the classifier on labelled draws from p (label 1) and
//! q (label 0).

use rand::seq::SliceRandom;

use super::mlp::{Mlp, MlpShape};
use crate::error::{Error, Result};
use crate::numerics::{RngStream, StreamRng};
use crate::scalar::Scalar;
use crate::tasks::JointSample;

const INIT_STREAM: u64 = 0x494e_4954;
const SHUFFLE_STREAM: u64 = 0x5348_5546;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    /// `None` trains full-batch (one step per epoch).
    pub batch_size: Option<usize>,
    pub hidden: usize,
    pub depth: usize,
    /// Cosine annealing `lr_t = lr (1 + cos(π t / T)) / 2` over epochs.
    pub cosine: bool,
    pub seed: u64,
}

impl TrainConfig {
    /// Desk-scale profile: h = 64, 500 full-batch epochs at 1e-3.
    pub fn fast() -> Self {
        Self {
            epochs: 500,
            lr: 1e-3,
            batch_size: None,
            hidden: 64,
            depth: 3,
            cosine: true,
            seed: 0,
        }
    }

    /// h = 256, 2000 epochs at 1e-5.
    pub fn paper() -> Self {
        Self {
            epochs: 2000,
            lr: 1e-5,
            batch_size: None,
            hidden: 256,
            depth: 3,
            cosine: true,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidParameter("epochs must be >= 1".into()));
        }
        if !(self.lr > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "learning rate must be > 0, got {}",
                self.lr
            )));
        }
        if self.batch_size == Some(0) {
            return Err(Error::InvalidParameter("batch size must be >= 1".into()));
        }
        Ok(())
    }

    pub fn learning_rate(&self, epoch: usize) -> f64 {
        if self.cosine {
            let frac = epoch as f64 / self.epochs as f64;
            self.lr * (1.0 + (std::f64::consts::PI * frac).cos()) / 2.0
        } else {
            self.lr
        }
    }

    /// Stream the network's initial weights are drawn from.
    pub fn init_stream(&self) -> RngStream {
        RngStream::new(self.seed, INIT_STREAM)
    }
}

/// Adam with `β₁ = 0.9`, `β₂ = 0.999`, `ε = 1e-8`.
#[derive(Debug, Clone)]
pub struct Adam<T> {
    m: Vec<T>,
    v: Vec<T>,
    t: i32,
    beta1: T,
    beta2: T,
    eps: T,
}

impl<T: Scalar> Adam<T> {
    pub fn new(n: usize) -> Self {
        Self {
            m: vec![T::zero(); n],
            v: vec![T::zero(); n],
            t: 0,
            beta1: T::of(0.9),
            beta2: T::of(0.999),
            eps: T::of(1e-8),
        }
    }

    pub fn step(&mut self, params: &mut [T], grad: &[T], lr: T) {
        self.t += 1;
        let c1 = T::one() - self.beta1.powi(self.t);
        let c2 = T::one() - self.beta2.powi(self.t);
        for (((p, &g), m), v) in params
            .iter_mut()
            .zip(grad)
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            *m = self.beta1 * *m + (T::one() - self.beta1) * g;
            *v = self.beta2 * *v + (T::one() - self.beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

/// A trained network together with its per-epoch mean training loss.
#[derive(Debug, Clone)]
pub struct TrainOutcome<T> {
    pub model: Mlp<T>,
    pub losses: Vec<T>,
}

/// Fresh network of the configured width, drawn from the config's init
/// stream.
pub fn init_network<T: Scalar>(input: usize, cfg: &TrainConfig) -> Result<Mlp<T>> {
    let shape = MlpShape::new(input, cfg.hidden).with_depth(cfg.depth);
    Mlp::init_uniform(shape, &mut cfg.init_stream().rng())
}

/// Trains a classifier to separate `p_samples` (label 1) from `q_samples`
/// (label 0) by minimising mean binary cross-entropy.
pub fn train<T: Scalar>(
    p_samples: &[JointSample<T>],
    q_samples: &[JointSample<T>],
    cfg: &TrainConfig,
) -> Result<TrainOutcome<T>> {
    cfg.validate()?;
    if p_samples.is_empty() || q_samples.is_empty() {
        return Err(Error::Empty("training samples"));
    }
    let features: Vec<(Vec<T>, T)> = p_samples
        .iter()
        .map(|x| (x.features(), T::one()))
        .chain(q_samples.iter().map(|x| (x.features(), T::zero())))
        .collect();
    let input = features[0].0.len();
    let mut model = init_network::<T>(input, cfg)?;
    let mut opt = Adam::new(model.params().len());
    let mut shuffle_rng: StreamRng = RngStream::new(cfg.seed, SHUFFLE_STREAM).rng();
    let mut order: Vec<usize> = (0..features.len()).collect();
    let mut losses = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        let lr = T::of(cfg.learning_rate(epoch));
        let batch_size = cfg.batch_size.unwrap_or(features.len()).min(features.len());
        if cfg.batch_size.is_some() {
            order.shuffle(&mut shuffle_rng);
        }
        let mut epoch_loss = T::zero();
        let mut batches = 0usize;
        for chunk in order.chunks(batch_size) {
            let batch: Vec<(&[T], T)> = chunk
                .iter()
                .map(|&i| (features[i].0.as_slice(), features[i].1))
                .collect();
            let (loss, grad) = model.loss_and_grad(&batch)?;
            if !loss.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    loss: loss.to_f64_lossy(),
                });
            }
            opt.step(model.params_mut(), &grad, lr);
            epoch_loss += loss;
            batches += 1;
        }
        let epoch_loss = epoch_loss / T::count(batches);
        log::debug!("epoch {epoch}: loss {epoch_loss}");
        losses.push(epoch_loss);
    }
    if model.params().iter().any(|p| !p.is_finite()) {
        return Err(Error::Diverged {
            epoch: cfg.epochs,
            loss: f64::NAN,
        });
    }
    Ok(TrainOutcome { model, losses })
}
