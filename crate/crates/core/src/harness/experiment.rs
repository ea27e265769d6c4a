//! Experiment descriptions: which task, which degradation, which tests, and
//! how many Monte-Carlo trials.

use std::fmt;
use std::str::FromStr;

use crate::classifier::TrainConfig;
use crate::error::{Error, Result};
use crate::tasks::{PerturbationKind, TaskKind};

/// Calibration sizes of the uniform-test family.
pub const UNIFORM_M_GRID: [usize; 7] = [1, 2, 5, 10, 20, 50, 200];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Uniform test with `m` calibration draws per test point.
    ConformalUniform(usize),
    ConformalMultiple,
    C2st,
    Sbc,
    Tarp,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::ConformalUniform(_) => "conformal_uniform",
            Method::ConformalMultiple => "conformal_multiple",
            Method::C2st => "c2st",
            Method::Sbc => "sbc",
            Method::Tarp => "tarp",
        }
    }

    /// Whether the method scores points with the classifier (and therefore
    /// responds to classifier degradation).
    pub fn uses_classifier(self) -> bool {
        !matches!(self, Method::Sbc | Method::Tarp)
    }

    /// Value of the `m` column: the calibration size for the uniform test,
    /// the posterior draws per observation for SBC/TARP, 1 otherwise.
    pub fn m(self, posterior_draws: usize) -> usize {
        match self {
            Method::ConformalUniform(m) => m,
            Method::Sbc | Method::Tarp => posterior_draws,
            Method::ConformalMultiple | Method::C2st => 1,
        }
    }

    /// The comparison set used for power curves: uniform at m = 200, the
    /// multiple test, C2ST, SBC and TARP.
    pub fn standard_set() -> Vec<Method> {
        vec![
            Method::ConformalUniform(200),
            Method::ConformalMultiple,
            Method::C2st,
            Method::Sbc,
            Method::Tarp,
        ]
    }

    /// Every method, with the full uniform-test m grid.
    pub fn all() -> Vec<Method> {
        let mut v: Vec<Method> = UNIFORM_M_GRID
            .iter()
            .map(|&m| Method::ConformalUniform(m))
            .collect();
        v.extend([
            Method::ConformalMultiple,
            Method::C2st,
            Method::Sbc,
            Method::Tarp,
        ]);
        v
    }

    /// Parses a comma-separated method list. `all` expands to [`Method::all`].
    /// `uniform` takes its m from `--m`-style defaults, so it must be given
    /// as `uniform(m)` here.
    pub fn parse_list(s: &str) -> Result<Vec<Method>> {
        let mut out = Vec::new();
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            if item == "all" {
                out.extend(Method::all());
            } else {
                out.push(item.parse()?);
            }
        }
        if out.is_empty() {
            return Err(Error::InvalidParameter("empty method list".into()));
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::ConformalUniform(m) => write!(f, "conformal_uniform({m})"),
            other => f.write_str(other.tag()),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let uniform_m = s
            .strip_prefix("conformal_uniform(")
            .or_else(|| s.strip_prefix("uniform("))
            .and_then(|r| r.strip_suffix(')'));
        if let Some(m) = uniform_m {
            let m: usize = m
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad calibration size in `{s}`")))?;
            if m == 0 {
                return Err(Error::InvalidParameter(
                    "calibration size must be >= 1".into(),
                ));
            }
            return Ok(Method::ConformalUniform(m));
        }
        match s {
            "conformal_multiple" | "multiple" => Ok(Method::ConformalMultiple),
            "c2st" => Ok(Method::C2st),
            "sbc" => Ok(Method::Sbc),
            "tarp" => Ok(Method::Tarp),
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }
}

/// How the scoring function is weakened along the β (or c) axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DegradationMode {
    /// Interpolate trained and random classifier parameters.
    ParamInterp,
    /// Add `N(0, β²)` noise to the oracle log density ratio.
    ScoreNoise,
    /// Translate the toy boundary by c.
    ToyShift,
    /// Rotate the toy boundary by β.
    ToyRotate,
}

impl DegradationMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DegradationMode::ParamInterp => "param_interp",
            DegradationMode::ScoreNoise => "score_noise",
            DegradationMode::ToyShift => "shift",
            DegradationMode::ToyRotate => "rotate",
        }
    }

    pub fn is_toy(self) -> bool {
        matches!(self, DegradationMode::ToyShift | DegradationMode::ToyRotate)
    }
}

impl FromStr for DegradationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "param_interp" | "param-interp" | "interp" => Ok(DegradationMode::ParamInterp),
            "score_noise" | "score-noise" | "noise" => Ok(DegradationMode::ScoreNoise),
            "shift" => Ok(DegradationMode::ToyShift),
            "rotate" => Ok(DegradationMode::ToyRotate),
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Profile {
    /// Desk scale: h = 64, 500 epochs at 1e-3, n_q = 200.
    #[default]
    Fast,
    /// h = 256, 2000 epochs at 1e-5, n_q = 1000.
    Paper,
}

impl Profile {
    pub fn train_config(self) -> TrainConfig {
        match self {
            Profile::Fast => TrainConfig::fast(),
            Profile::Paper => TrainConfig::paper(),
        }
    }

    pub fn n_q(self) -> usize {
        match self {
            Profile::Fast => 200,
            Profile::Paper => 1000,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Profile::Fast => "fast",
            Profile::Paper => "paper",
        }
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Profile::Fast),
            "paper" => Ok(Profile::Paper),
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }
}

/// A full Monte-Carlo experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub task: TaskKind,
    /// Perturbation strengths γ (ignored by the toy task).
    pub gammas: Vec<f64>,
    pub mode: DegradationMode,
    /// Degradation levels: β for interpolation/noise/rotation, c for shift.
    pub betas: Vec<f64>,
    pub methods: Vec<Method>,
    /// Classifier training draws per class.
    pub n_train: usize,
    /// Test points from q per trial (and observations for SBC/TARP).
    pub n_q: usize,
    pub trials: usize,
    pub seeds: Vec<u64>,
    pub alpha: f64,
    pub profile: Profile,
    /// Overrides the profile's training configuration when set.
    pub train: Option<TrainConfig>,
    /// Posterior draws per observation for SBC and TARP.
    pub posterior_draws: usize,
    /// θ and y dimensions of the Gaussian tasks.
    pub dims: (usize, usize),
    /// Master seed every random stream is derived from.
    pub seed: u64,
    /// Write measured wall time into rows; when off the column is 0 so the
    /// output is byte-for-byte reproducible.
    pub record_timing: bool,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            task: TaskKind::Gaussian(PerturbationKind::CovScaling),
            gammas: vec![0.0],
            mode: DegradationMode::ParamInterp,
            betas: vec![0.0],
            methods: Method::standard_set(),
            n_train: 1000,
            n_q: Profile::Fast.n_q(),
            trials: 200,
            seeds: vec![0, 1, 2],
            alpha: 0.05,
            profile: Profile::Fast,
            train: None,
            posterior_draws: 200,
            dims: (3, 3),
            seed: 0,
            record_timing: false,
        }
    }
}

impl ExperimentSpec {
    pub fn with_profile(profile: Profile) -> Self {
        Self {
            profile,
            n_q: profile.n_q(),
            ..Self::default()
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        self.train
            .clone()
            .unwrap_or_else(|| self.profile.train_config())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.gammas.is_empty()
            || self.betas.is_empty()
            || self.methods.is_empty()
            || self.seeds.is_empty()
        {
            return bad("γ grid, β grid, method list and seed list must be non-empty".into());
        }
        if self.trials == 0 || self.n_q < 2 || self.n_train == 0 {
            return bad("trials, n_train must be >= 1 and n_q >= 2".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.posterior_draws < 2 {
            return bad("SBC/TARP need at least 2 posterior draws".into());
        }
        if self
            .gammas
            .iter()
            .chain(&self.betas)
            .any(|v| !v.is_finite())
        {
            return bad("grid values must be finite".into());
        }
        match (self.task, self.mode.is_toy()) {
            (TaskKind::Toy, false) => {
                return bad("the toy task takes --mode shift or rotate".into())
            }
            (TaskKind::Gaussian(_), true) => {
                return bad("shift/rotate degradations need the toy task".into())
            }
            _ => {}
        }
        if self.mode == DegradationMode::ParamInterp
            && self.betas.iter().any(|b| !(0.0..=1.0).contains(b))
        {
            return bad("interpolation β must lie in [0, 1]".into());
        }
        if self.mode == DegradationMode::ScoreNoise && self.betas.iter().any(|&b| b < 0.0) {
            return bad("noise std must be >= 0".into());
        }
        self.train_config().validate()
    }
}

/// Parses a comma-separated list of reals (e.g. `0,0.25,0.5`). The tokens
/// `pi`, `pi/2`, `pi/4`, `pi/8` and `3pi/8` are accepted for angles.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    use std::f64::consts::PI;
    let parse_one = |t: &str| -> Result<f64> {
        let v = match t {
            "pi" => PI,
            "pi/2" => PI / 2.0,
            "pi/4" => PI / 4.0,
            "pi/8" => PI / 8.0,
            "3pi/8" => 3.0 * PI / 8.0,
            _ => t
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("not a number: `{t}`")))?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::InvalidParameter(format!("not finite: `{t}`")))
        }
    };
    let v = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(parse_one)
        .collect::<Result<Vec<f64>>>()?;
    if v.is_empty() {
        return Err(Error::InvalidParameter("empty grid".into()));
    }
    Ok(v)
}

pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let v = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<u64>()
                .map_err(|_| Error::InvalidParameter(format!("bad seed `{t}`")))
        })
        .collect::<Result<Vec<u64>>>()?;
    if v.is_empty() {
        return Err(Error::InvalidParameter("empty seed list".into()));
    }
    Ok(v)
}
