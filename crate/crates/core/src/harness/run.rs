use std::cmp::Ordering;
use std::time::Instant;

use super::experiment::{DegradationMode, ExperimentSpec, Method};
use crate::baselines::{c2st_test_sampled, sbc_test, tarp_test, SbcConfig, TarpConfig};
use crate::classifier::{
    degrade, init_network, train, BoundaryScore, FnScore, Mlp, MlpScore, NoisyScore, ScoreFunction,
    TrainConfig,
};
use crate::conformal::{multiple_test_sampled, uniform_test, TestOutcome, UniformTestConfig};
use crate::error::{Error, Result};
use crate::numerics::{mix, RngStream};
use crate::scalar::Scalar;
use crate::tasks::{GaussianTask, JointSample, TaskKind, TaskPair, ToyTask};

/// Rejection rate of one method in one (γ, β, seed) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub task: String,
    pub gamma: f64,
    pub beta: f64,
    pub method: String,
    pub m: usize,
    pub seed: u64,
    pub trials: usize,
    pub rejection_rate: f64,
    pub mean_statistic: f64,
    pub wall_time_s: f64,
}

impl ResultRow {
    /// Canonical row order: task, γ, β, method, m, seed.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.task
            .cmp(&other.task)
            .then(self.gamma.total_cmp(&other.gamma))
            .then(self.beta.total_cmp(&other.beta))
            .then(self.method.cmp(&other.method))
            .then(self.m.cmp(&other.m))
            .then(self.seed.cmp(&other.seed))
    }

    /// Method label including the calibration size for the uniform test.
    pub fn label(&self) -> String {
        if self.method == Method::ConformalUniform(1).tag() {
            format!("{}({})", self.method, self.m)
        } else {
            self.method.clone()
        }
    }
}

pub fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(ResultRow::canonical_cmp);
}

/// Rejection rate pooled over seeds, with its binomial standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct PooledRow {
    pub task: String,
    pub gamma: f64,
    pub beta: f64,
    pub label: String,
    pub m: usize,
    pub trials: usize,
    pub rejection_rate: f64,
    pub se: f64,
}

/// Averages rows that differ only in their seed. Output follows canonical
/// order.
pub fn pool_seeds(rows: &[ResultRow]) -> Vec<PooledRow> {
    let mut sorted = rows.to_vec();
    sort_rows(&mut sorted);
    let mut out: Vec<PooledRow> = Vec::new();
    let mut rejections = 0.0;
    for r in &sorted {
        let same = out.last().is_some_and(|p| {
            p.task == r.task
                && p.gamma == r.gamma
                && p.beta == r.beta
                && p.label == r.label()
                && p.m == r.m
        });
        if !same {
            if let Some(p) = out.last_mut() {
                finish(p, rejections);
            }
            rejections = 0.0;
            out.push(PooledRow {
                task: r.task.clone(),
                gamma: r.gamma,
                beta: r.beta,
                label: r.label(),
                m: r.m,
                trials: 0,
                rejection_rate: 0.0,
                se: 0.0,
            });
        }
        let p = out.last_mut().expect("pushed above");
        p.trials += r.trials;
        rejections += r.rejection_rate * r.trials as f64;
    }
    if let Some(p) = out.last_mut() {
        finish(p, rejections);
    }
    out
}

fn finish(p: &mut PooledRow, rejections: f64) {
    let n = p.trials as f64;
    p.rejection_rate = rejections / n;
    p.se = (p.rejection_rate * (1.0 - p.rejection_rate) / n).sqrt();
}

const TRAIN_TAG: u64 = 0x0074_7261_696e;
const EVAL_TAG: u64 = 0x6576_616c;
const NOISE_TAG: u64 = 0x006e_6f69_7365;

/// Builds the task object for one γ.
pub fn build_task<T: Scalar>(spec: &ExperimentSpec, gamma: f64) -> Result<Box<dyn TaskPair<T>>> {
    match spec.task {
        TaskKind::Gaussian(kind) => Ok(Box::new(
            GaussianTask::<T>::builder(kind)
                .gamma(gamma)
                .dims(spec.dims.0, spec.dims.1)
                .build::<T>()?,
        )),
        TaskKind::Toy => Ok(Box::new(ToyTask::<T>::default())),
    }
}

/// A classifier trained on fresh draws from both joints, plus the random
/// network it is interpolated towards.
pub struct TrainedPair<T> {
    pub trained: Mlp<T>,
    pub random: Mlp<T>,
}

pub fn train_pair<T: Scalar>(
    task: &dyn TaskPair<T>,
    n_train: usize,
    cfg: &TrainConfig,
    stream: RngStream,
) -> Result<TrainedPair<T>> {
    let p = task.sample_true_n(n_train, &mut stream.named("p").rng());
    let q = task.sample_approx_n(n_train, &mut stream.named("q").rng());
    let cfg = cfg.clone().with_seed(mix(stream.stream));
    let trained = train(&p, &q, &cfg)?.model;
    let random = init_network(
        task.theta_dim() + task.y_dim(),
        &cfg.clone().with_seed(mix(!stream.stream)),
    )?;
    Ok(TrainedPair { trained, random })
}

/// One trial of one method.
pub fn run_trial<T: Scalar>(
    method: Method,
    score: &dyn ScoreFunction<T>,
    task: &dyn TaskPair<T>,
    spec: &ExperimentSpec,
    stream: RngStream,
) -> Result<TestOutcome<T>> {
    let alpha = T::of(spec.alpha);
    let n = spec.n_q;
    match method {
        Method::ConformalUniform(m) => {
            let cfg = UniformTestConfig::new(m, n, alpha);
            Ok(uniform_test(score, task, &cfg, stream)?.1)
        }
        Method::ConformalMultiple => Ok(multiple_test_sampled(score, task, n, n, alpha, stream)?.1),
        Method::C2st => c2st_test_sampled(score, task, n, alpha, stream),
        Method::Sbc => sbc_test(
            task,
            n,
            &SbcConfig::new(spec.posterior_draws, alpha),
            stream,
        ),
        Method::Tarp => tarp_test(
            task,
            n,
            &TarpConfig::new(spec.posterior_draws, alpha),
            stream,
        ),
    }
}

struct CellResult {
    rate: f64,
    mean_stat: f64,
    seconds: f64,
}

fn run_cell<T: Scalar>(
    method: Method,
    score: &dyn ScoreFunction<T>,
    task: &dyn TaskPair<T>,
    spec: &ExperimentSpec,
    stream: RngStream,
) -> Result<CellResult> {
    let start = Instant::now();
    let (mut rejections, mut stat_sum) = (0usize, 0.0);
    for trial in 0..spec.trials {
        let out = run_trial(method, score, task, spec, stream.child(trial as u64))?;
        rejections += usize::from(out.reject);
        stat_sum += out.statistic.to_f64_lossy();
    }
    Ok(CellResult {
        rate: rejections as f64 / spec.trials as f64,
        mean_stat: stat_sum / spec.trials as f64,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Scores for every β of one (γ, seed) cell.
fn degraded_scores<'a, T: Scalar>(
    spec: &ExperimentSpec,
    task: &'a dyn TaskPair<T>,
    cell: RngStream,
) -> Result<Vec<Box<dyn ScoreFunction<T> + 'a>>> {
    let mut out: Vec<Box<dyn ScoreFunction<T> + 'a>> = Vec::with_capacity(spec.betas.len());
    match spec.mode {
        DegradationMode::ParamInterp => {
            let pair = train_pair(
                task,
                spec.n_train,
                &spec.train_config(),
                cell.child(TRAIN_TAG),
            )?;
            for &b in &spec.betas {
                out.push(Box::new(MlpScore::new(degrade(
                    &pair.trained,
                    &pair.random,
                    T::of(b),
                )?)));
            }
        }
        DegradationMode::ScoreNoise => {
            let probe = task.sample_true(&mut cell.rng());
            if task.oracle_log_ratio(&probe).is_none() {
                return Err(Error::InvalidParameter(format!(
                    "task {} has no oracle ratio",
                    task.name()
                )));
            }
            for &b in &spec.betas {
                let oracle = FnScore(move |x: &JointSample<T>| {
                    task.oracle_log_ratio(x).unwrap_or_else(T::nan)
                });
                out.push(Box::new(NoisyScore::new(
                    oracle,
                    T::of(b),
                    cell.child(NOISE_TAG),
                )?));
            }
        }
        DegradationMode::ToyShift => {
            for &c in &spec.betas {
                out.push(Box::new(BoundaryScore {
                    task: ToyTask::new(T::of(c), T::zero()),
                }));
            }
        }
        DegradationMode::ToyRotate => {
            for &b in &spec.betas {
                out.push(Box::new(BoundaryScore {
                    task: ToyTask::new(T::zero(), T::of(b)),
                }));
            }
        }
    }
    Ok(out)
}

/// Runs `spec`, handing each finished row to `on_row` as soon as it is
/// computed so that callers keep partial results if a later cell fails.
///
/// The classifier is trained once per (γ, seed) and reused for every β,
/// method and trial. Evaluation streams depend on (seed, γ, method, trial)
/// but not on β, so every degradation level is evaluated on the same draws.
pub fn run_experiment_streaming<T: Scalar>(
    spec: &ExperimentSpec,
    on_row: &mut dyn FnMut(ResultRow),
) -> Result<()> {
    spec.validate()?;
    let root = RngStream::new(spec.seed, 0);
    let needs_scores = spec.methods.iter().any(|m| m.uses_classifier());
    for (gi, &gamma) in spec.gammas.iter().enumerate() {
        let task = build_task::<T>(spec, gamma)?;
        for &seed in &spec.seeds {
            let cell = root.derive(&[seed, gi as u64]);
            let scores = if needs_scores {
                degraded_scores(spec, task.as_ref(), cell)?
            } else {
                Vec::new()
            };
            for &method in &spec.methods {
                let stream = cell.child(EVAL_TAG).named(&method.to_string());
                let row = |beta: f64, r: &CellResult| ResultRow {
                    task: spec.task.as_str().to_string(),
                    gamma,
                    beta,
                    method: method.tag().to_string(),
                    m: method.m(spec.posterior_draws),
                    seed,
                    trials: spec.trials,
                    rejection_rate: r.rate,
                    mean_statistic: r.mean_stat,
                    wall_time_s: if spec.record_timing { r.seconds } else { 0.0 },
                };
                if method.uses_classifier() {
                    for (bi, &beta) in spec.betas.iter().enumerate() {
                        let r = run_cell(method, scores[bi].as_ref(), task.as_ref(), spec, stream)?;
                        log::info!(
                            "{} γ={gamma} β={beta} seed={seed} {method}: {:.4}",
                            spec.task,
                            r.rate
                        );
                        on_row(row(beta, &r));
                    }
                } else {
                    // score-free tests do not see the degradation
                    let unused = FnScore(|_: &JointSample<T>| T::zero());
                    let r = run_cell(method, &unused, task.as_ref(), spec, stream)?;
                    log::info!(
                        "{} γ={gamma} seed={seed} {method}: {:.4}",
                        spec.task,
                        r.rate
                    );
                    for &beta in &spec.betas {
                        on_row(row(beta, &r));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Runs `spec` and returns its rows in canonical order.
pub fn run_experiment<T: Scalar>(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    run_experiment_streaming::<T>(spec, &mut |r| rows.push(r))?;
    sort_rows(&mut rows);
    Ok(rows)
}

/// γ values tried, in order, when a degradation sweep needs a default γ.
pub const DEFAULT_GAMMA_GRID: [f64; 6] = [0.1, 0.2, 0.3, 0.5, 0.75, 1.0];

/// Uniform(200) power the default γ must reach before degradation.
pub const DEFAULT_GAMMA_POWER: f64 = 0.9;

/// Outcome of the search for a task's degradation-sweep γ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaChoice {
    pub gamma: f64,
    /// Uniform(200) power at β = 0 for the chosen γ.
    pub power: f64,
    /// Whether the power target was reached anywhere on the grid.
    pub target_met: bool,
}

/// Smallest γ on `grid` at which the uniform test with m = 200 and an
/// undegraded classifier reaches power `target`, using the first seed of
/// `base`. Falls back to the largest γ when no grid value reaches it.
pub fn default_degradation_gamma<T: Scalar>(
    base: &ExperimentSpec,
    grid: &[f64],
    target: f64,
) -> Result<GammaChoice> {
    let mut grid = grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let mut last = None;
    for &gamma in &grid {
        let spec = ExperimentSpec {
            gammas: vec![gamma],
            betas: vec![0.0],
            mode: DegradationMode::ParamInterp,
            methods: vec![Method::ConformalUniform(200)],
            seeds: vec![base.seeds.first().copied().unwrap_or(0)],
            ..base.clone()
        };
        let power = run_experiment::<T>(&spec)?[0].rejection_rate;
        log::info!("γ search on {}: γ={gamma} power {power:.3}", base.task);
        if power >= target {
            return Ok(GammaChoice {
                gamma,
                power,
                target_met: true,
            });
        }
        last = Some(GammaChoice {
            gamma,
            power,
            target_met: false,
        });
    }
    last.ok_or(Error::Empty("γ grid"))
}
