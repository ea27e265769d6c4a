//! Residual ReLU network with a scalar logit head.
//!
//! Architecture for `depth = d`: `input → dense(h) → ReLU`, then `d − 1`
//! blocks `h ← h + ReLU(dense(h))`, then `dense(1)`. All parameters live in
//! one flat vector so that two networks of the same shape can be
//! interpolated elementwise.
//!
//! Flat layout: `W₁ (input × h)`, `b₁ (h)`, then per block `W (h × h)`,
//! `b (h)`, then the head `w (h)`, `b (1)`. Weight matrices are stored
//! input-major: entry `(i, j)` connects input unit `i` to output unit `j`.

use crate::error::{Error, Result};
use crate::numerics::StreamRng;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
}

impl Activation {
    pub fn tag(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MlpShape {
    pub input: usize,
    pub hidden: usize,
    /// Number of hidden dense layers (first layer plus residual blocks).
    pub depth: usize,
    pub activation: Activation,
}

impl MlpShape {
    pub fn new(input: usize, hidden: usize) -> Self {
        Self {
            input,
            hidden,
            depth: 3,
            activation: Activation::Relu,
        }
    }

    pub fn with_depth(mut self, depth: usize) -> Self {
        self.depth = depth;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.input == 0 || self.hidden == 0 || self.depth == 0 {
            return Err(Error::InvalidParameter(format!(
                "degenerate network shape {self:?}"
            )));
        }
        Ok(())
    }

    pub fn param_count(&self) -> usize {
        let h = self.hidden;
        (self.input * h + h) + (self.depth - 1) * (h * h + h) + (h + 1)
    }

    /// Offset of the first layer's bias; its weights start at 0.
    fn first_bias(&self) -> usize {
        self.input * self.hidden
    }

    /// Offsets of the weights and biases of hidden layer `l`, for
    /// `2 ≤ l ≤ depth` (layer 1 is the input layer).
    fn block(&self, l: usize) -> (usize, usize) {
        let h = self.hidden;
        let w = self.input * h + h + (l - 2) * (h * h + h);
        (w, w + h * h)
    }

    fn head(&self) -> (usize, usize) {
        let w = self.block(self.depth + 1).0;
        (w, w + self.hidden)
    }
}

/// Network parameters: a shape plus its flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<T> {
    shape: MlpShape,
    params: Vec<T>,
}

/// Activations kept from a forward pass for back-propagation.
struct Tape<T> {
    /// Pre-activations of every hidden dense layer.
    pre: Vec<Vec<T>>,
    /// Hidden states `h₁ … h_d`.
    hidden: Vec<Vec<T>>,
    logit: T,
}

fn dense_into<T: Scalar>(x: &[T], w: &[T], b: &[T], out: &mut [T]) {
    out.copy_from_slice(b);
    let n_out = out.len();
    for (i, &xi) in x.iter().enumerate() {
        if xi == T::zero() {
            continue;
        }
        let row = &w[i * n_out..(i + 1) * n_out];
        for (o, &wij) in out.iter_mut().zip(row) {
            *o += xi * wij;
        }
    }
}

fn relu<T: Scalar>(v: T) -> T {
    if v > T::zero() {
        v
    } else {
        T::zero()
    }
}

/// Mean binary cross-entropy with logits and its per-sample derivative.
fn bce_with_logit<T: Scalar>(z: T, label: T) -> (T, T) {
    // softplus(z) − ℓ z, evaluated stably
    let softplus = if z > T::zero() {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    };
    (softplus - label * z, sigmoid(z) - label)
}

pub fn sigmoid<T: Scalar>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

impl<T: Scalar> Mlp<T> {
    pub fn zeros(shape: MlpShape) -> Result<Self> {
        shape.validate()?;
        Ok(Self {
            shape,
            params: vec![T::zero(); shape.param_count()],
        })
    }

    pub fn from_params(shape: MlpShape, params: Vec<T>) -> Result<Self> {
        shape.validate()?;
        if params.len() != shape.param_count() {
            return Err(Error::DimensionMismatch {
                expected: shape.param_count(),
                got: params.len(),
            });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter("parameters must be finite".into()));
        }
        Ok(Self { shape, params })
    }

    /// Every layer's weights and biases drawn from
    /// `Unif(−1/√fan_in, 1/√fan_in)`.
    pub fn init_uniform(shape: MlpShape, rng: &mut StreamRng) -> Result<Self> {
        let mut mlp = Self::zeros(shape)?;
        let h = shape.hidden;
        let mut fill = |range: std::ops::Range<usize>, fan_in: usize, params: &mut [T]| {
            let bound = T::of(1.0 / (fan_in as f64).sqrt());
            for p in &mut params[range] {
                *p = (T::of(2.0) * T::unit(rng) - T::one()) * bound;
            }
        };
        fill(0..shape.first_bias() + h, shape.input, &mut mlp.params);
        for l in 2..=shape.depth {
            let (w, b) = shape.block(l);
            fill(w..b + h, h, &mut mlp.params);
        }
        let (w, b) = shape.head();
        fill(w..b + 1, h, &mut mlp.params);
        Ok(mlp)
    }

    pub fn shape(&self) -> MlpShape {
        self.shape
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    fn check_input(&self, x: &[T]) -> Result<()> {
        if x.len() != self.shape.input {
            return Err(Error::DimensionMismatch {
                expected: self.shape.input,
                got: x.len(),
            });
        }
        Ok(())
    }

    fn run(&self, x: &[T], keep: bool) -> Tape<T> {
        let s = self.shape;
        let h = s.hidden;
        let p = &self.params;
        let b1 = s.first_bias();
        let mut pre = vec![T::zero(); h];
        dense_into(x, &p[..b1], &p[b1..b1 + h], &mut pre);
        let mut state: Vec<T> = pre.iter().map(|&v| relu(v)).collect();
        let mut tape = Tape {
            pre: Vec::new(),
            hidden: Vec::new(),
            logit: T::zero(),
        };
        if keep {
            tape.pre.push(pre.clone());
            tape.hidden.push(state.clone());
        }
        for l in 2..=s.depth {
            let (w, b) = s.block(l);
            dense_into(&state, &p[w..b], &p[b..b + h], &mut pre);
            for (hs, &a) in state.iter_mut().zip(&pre) {
                *hs += relu(a);
            }
            if keep {
                tape.pre.push(pre.clone());
                tape.hidden.push(state.clone());
            }
        }
        let (w, b) = s.head();
        tape.logit = state.iter().zip(&p[w..b]).map(|(&a, &c)| a * c).sum::<T>() + p[b];
        tape
    }

    /// Output logit for one input vector.
    pub fn forward(&self, x: &[T]) -> Result<T> {
        self.check_input(x)?;
        Ok(self.run(x, false).logit)
    }

    /// Logit without the dimension check; callers guarantee the input size.
    pub fn logit(&self, x: &[T]) -> T {
        debug_assert_eq!(x.len(), self.shape.input);
        self.run(x, false).logit
    }

    /// Classifier probability `η(x) = sigmoid(logit)`.
    pub fn probability(&self, x: &[T]) -> Result<T> {
        self.forward(x).map(sigmoid)
    }

    /// Mean binary cross-entropy over `(features, label)` pairs and its
    /// exact gradient with respect to the flat parameter vector.
    pub fn loss_and_grad(&self, batch: &[(&[T], T)]) -> Result<(T, Vec<T>)> {
        if batch.is_empty() {
            return Err(Error::Empty("gradient batch"));
        }
        let s = self.shape;
        let h = s.hidden;
        let p = &self.params;
        let mut grad = vec![T::zero(); p.len()];
        let mut loss = T::zero();
        let inv_n = T::one() / T::count(batch.len());
        let mut dh = vec![T::zero(); h];
        let mut da = vec![T::zero(); h];

        for &(x, label) in batch {
            self.check_input(x)?;
            let tape = self.run(x, true);
            let (l, dz) = bce_with_logit(tape.logit, label);
            loss += l;
            let g = dz * inv_n;

            let (hw, hb) = s.head();
            let last = &tape.hidden[s.depth - 1];
            for j in 0..h {
                grad[hw + j] += g * last[j];
                dh[j] = g * p[hw + j];
            }
            grad[hb] += g;

            for l in (2..=s.depth).rev() {
                let (w, b) = s.block(l);
                let input = &tape.hidden[l - 2];
                let pre = &tape.pre[l - 1];
                for j in 0..h {
                    da[j] = if pre[j] > T::zero() { dh[j] } else { T::zero() };
                    grad[b + j] += da[j];
                }
                for (i, &hi) in input.iter().enumerate() {
                    let row = w + i * h..w + (i + 1) * h;
                    if hi != T::zero() {
                        for (gr, &d) in grad[row.clone()].iter_mut().zip(&da) {
                            *gr += hi * d;
                        }
                    }
                    let back = p[row]
                        .iter()
                        .zip(&da)
                        .fold(T::zero(), |acc, (&wij, &d)| acc + wij * d);
                    // residual path carries dh through unchanged
                    dh[i] += back;
                }
            }

            let b1 = s.first_bias();
            let pre = &tape.pre[0];
            for j in 0..h {
                da[j] = if pre[j] > T::zero() { dh[j] } else { T::zero() };
                grad[b1 + j] += da[j];
            }
            for (i, &xi) in x.iter().enumerate() {
                for (gr, &d) in grad[i * h..(i + 1) * h].iter_mut().zip(&da) {
                    *gr += xi * d;
                }
            }
        }
        Ok((loss * inv_n, grad))
    }

    /// Mean binary cross-entropy without the gradient.
    pub fn loss(&self, batch: &[(&[T], T)]) -> Result<T> {
        if batch.is_empty() {
            return Err(Error::Empty("loss batch"));
        }
        let mut total = T::zero();
        for &(x, label) in batch {
            self.check_input(x)?;
            total += bce_with_logit(self.run(x, false).logit, label).0;
        }
        Ok(total / T::count(batch.len()))
    }
}

/// `(1 − β) ψ_trained + β ψ_rand`, elementwise.
pub fn degrade<T: Scalar>(trained: &Mlp<T>, random: &Mlp<T>, beta: T) -> Result<Mlp<T>> {
    if trained.shape != random.shape {
        return Err(Error::DimensionMismatch {
            expected: trained.params.len(),
            got: random.params.len(),
        });
    }
    if !(beta >= T::zero() && beta <= T::one()) {
        return Err(Error::InvalidParameter(format!(
            "beta must lie in [0, 1], got {beta}"
        )));
    }
    if beta == T::zero() {
        return Ok(trained.clone());
    }
    if beta == T::one() {
        return Ok(random.clone());
    }
    let params = trained
        .params
        .iter()
        .zip(&random.params)
        .map(|(&a, &b)| (T::one() - beta) * a + beta * b)
        .collect();
    Ok(Mlp {
        shape: trained.shape,
        params,
    })
}
