//! `c2st`: run conformal and baseline posterior tests over experiment grids.
//!
//! Exit status is 0 on success, 1 for bad arguments or settings and 2 when
//! an experiment fails at run time (rows finished before the failure are
//! still written).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use conformal_c2st::harness::{
    default_degradation_gamma, diagnose, diagnostics_to_csv, emit_csv, emit_power_plot,
    run_experiment_streaming, run_selftest, sort_rows, ExperimentSpec, PlotAxis, ResultRow,
    Settings, DEFAULT_GAMMA_GRID, DEFAULT_GAMMA_POWER,
};
use conformal_c2st::{Error, Scalar};

#[derive(Parser)]
#[command(
    name = "c2st",
    version,
    about = "Conformal classifier two-sample tests for posterior validation"
)]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rejection rates over a γ × β × method grid on a Gaussian task.
    Run(RunArgs),
    /// Boundary shift or rotation sweeps on the two-class toy problem.
    Toy(ToyArgs),
    /// Compare three estimates of the expected conformal p-value.
    Diagnose(DiagnoseArgs),
    /// Quick checks against closed-form values.
    Selftest,
}

#[derive(Clone, Copy, ValueEnum)]
enum Precision {
    F32,
    F64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ToyMode {
    Shift,
    Rotate,
}

#[derive(Args)]
struct Common {
    /// `key = value` settings file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Methods, comma separated (`all`, `uniform`, `uniform(20)`, `multiple`, `c2st`, `sbc`, `tarp`).
    #[arg(long)]
    methods: Option<String>,
    /// Calibration sizes for bare `uniform`, comma separated.
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    /// Seed list (`0,1,2`) or a count (`3` means seeds 0..3).
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    /// Test points per trial.
    #[arg(long = "n-q")]
    n_q: Option<String>,
    /// Training draws per class.
    #[arg(long = "n-train")]
    n_train: Option<String>,
    /// `fast` or `paper`.
    #[arg(long)]
    profile: Option<String>,
    /// Master seed.
    #[arg(long)]
    seed: Option<String>,
    /// Posterior draws for SBC and TARP.
    #[arg(long)]
    draws: Option<String>,
    /// Output directory for results.csv, power.svg and metadata.txt.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record wall time per row (makes output non-reproducible).
    #[arg(long)]
    timing: bool,
    #[arg(long, value_enum, default_value = "f64")]
    precision: Precision,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    task: Option<String>,
    /// γ grid, comma separated. Omitted with a β sweep: searched for.
    #[arg(long)]
    gamma: Option<String>,
    /// β grid, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
    /// `param_interp` or `score_noise`.
    #[arg(long)]
    mode: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ToyArgs {
    #[arg(long, value_enum)]
    mode: ToyMode,
    /// Shift offsets c or rotation angles β (`pi/4` etc. allowed).
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[arg(long, default_value = "cov_scaling")]
    task: String,
    #[arg(long, default_value = "0.5")]
    gamma: String,
    #[arg(long, default_value_t = 200)]
    m: usize,
    /// Draws per estimator.
    #[arg(long, default_value_t = 20_000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "f64")]
    precision: Precision,
    /// Write diagnostics.csv here instead of printing.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Settings-level failures map to exit status 1.
struct UsageError(String);

enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e.0)
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn usage(e: impl std::fmt::Display) -> UsageError {
    UsageError(e.to_string())
}

fn settings(common: &Common, extra: &[(&str, Option<&str>)]) -> Result<Settings, UsageError> {
    let mut s = match &common.config {
        Some(path) => {
            let text =
                fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            Settings::parse(&text).map_err(usage)?
        }
        None => Settings::new(),
    };
    let mut flags = Settings::new();
    let pairs = [
        ("methods", common.methods.as_deref()),
        ("m", common.m.as_deref()),
        ("trials", common.trials.as_deref()),
        ("seeds", common.seeds.as_deref()),
        ("alpha", common.alpha.as_deref()),
        ("n-q", common.n_q.as_deref()),
        ("n-train", common.n_train.as_deref()),
        ("profile", common.profile.as_deref()),
        ("seed", common.seed.as_deref()),
        ("draws", common.draws.as_deref()),
    ];
    for (k, v) in pairs.iter().chain(extra) {
        if let Some(v) = v {
            flags.set(k, v).map_err(usage)?;
        }
    }
    s.merge(&flags);
    Ok(s)
}

fn out_dir(common: &Common, s: &Settings) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| s.get("out").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("results"))
}

fn plot_axis(spec: &ExperimentSpec) -> PlotAxis {
    if spec.betas.len() > 1 {
        PlotAxis::Beta
    } else if spec.gammas.len() > 1 {
        PlotAxis::Gamma
    } else if spec
        .methods
        .iter()
        .filter(|m| m.tag() == "conformal_uniform")
        .count()
        > 1
    {
        PlotAxis::M
    } else {
        PlotAxis::Gamma
    }
}

fn write_outputs(
    rows: &mut [ResultRow],
    spec: &ExperimentSpec,
    dir: &Path,
    meta: &str,
) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    sort_rows(rows);
    emit_csv(rows, &dir.join("results.csv"))?;
    fs::write(dir.join("metadata.txt"), meta)
        .with_context(|| format!("writing {}", dir.display()))?;
    if !rows.is_empty() {
        emit_power_plot(rows, plot_axis(spec), spec.alpha, &dir.join("power.svg"))?;
    }
    Ok(())
}

fn metadata(spec: &ExperimentSpec, extra: &str) -> String {
    let list = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
    let mut m = String::new();
    let _ = writeln!(m, "version = {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(m, "task = {}", spec.task);
    let _ = writeln!(m, "mode = {}", spec.mode.as_str());
    let _ = writeln!(m, "gamma = {}", list(&spec.gammas));
    let _ = writeln!(m, "beta = {}", list(&spec.betas));
    let methods: Vec<String> = spec.methods.iter().map(ToString::to_string).collect();
    let _ = writeln!(m, "methods = {}", methods.join(","));
    let seeds: Vec<String> = spec.seeds.iter().map(ToString::to_string).collect();
    let _ = writeln!(m, "seeds = {}", seeds.join(","));
    let _ = writeln!(m, "trials = {}", spec.trials);
    let _ = writeln!(m, "alpha = {}", spec.alpha);
    let _ = writeln!(m, "n-q = {}", spec.n_q);
    let _ = writeln!(m, "n-train = {}", spec.n_train);
    let _ = writeln!(m, "profile = {}", spec.profile.as_str());
    let _ = writeln!(m, "draws = {}", spec.posterior_draws);
    let _ = writeln!(m, "seed = {}", spec.seed);
    m.push_str(extra);
    m
}

fn execute<T: Scalar>(spec: &ExperimentSpec, dir: &Path, extra_meta: &str) -> Result<(), Failure> {
    let mut rows = Vec::new();
    let result = run_experiment_streaming::<T>(spec, &mut |r| rows.push(r));
    let meta = metadata(spec, extra_meta);
    let written = write_outputs(&mut rows, spec, dir, &meta);
    result.with_context(|| format!("experiment failed after {} rows", rows.len()))?;
    written?;
    eprintln!(
        "wrote {} rows to {}",
        rows.len(),
        dir.join("results.csv").display()
    );
    Ok(())
}

fn cmd_run(args: &RunArgs) -> Result<(), Failure> {
    let extra = [
        ("task", args.task.as_deref()),
        ("gamma", args.gamma.as_deref()),
        ("beta", args.beta.as_deref()),
        ("mode", args.mode.as_deref()),
    ];
    let s = settings(&args.common, &extra)?;
    let mut spec = s.to_spec().map_err(usage)?;
    if spec.task.as_str() == "toy" {
        return Err(usage("use `c2st toy` for the toy task").into());
    }
    spec.record_timing = args.common.timing;
    let mut extra_meta = String::new();
    let sweep = spec.betas.len() > 1 || spec.betas.iter().any(|&b| b != 0.0);
    if s.get("gamma").is_none() && sweep {
        let choice = match args.common.precision {
            Precision::F32 => {
                default_degradation_gamma::<f32>(&spec, &DEFAULT_GAMMA_GRID, DEFAULT_GAMMA_POWER)
            }
            Precision::F64 => {
                default_degradation_gamma::<f64>(&spec, &DEFAULT_GAMMA_GRID, DEFAULT_GAMMA_POWER)
            }
        }
        .context("searching for the default γ")?;
        if !choice.target_met {
            eprintln!(
                "warning: no γ on the grid reached power {DEFAULT_GAMMA_POWER}; using {}",
                choice.gamma
            );
        }
        spec.gammas = vec![choice.gamma];
        let _ = writeln!(extra_meta, "default_gamma = {}", choice.gamma);
        let _ = writeln!(extra_meta, "default_gamma_power = {}", choice.power);
        let _ = writeln!(
            extra_meta,
            "default_gamma_target_met = {}",
            choice.target_met
        );
    }
    let dir = out_dir(&args.common, &s);
    match args.common.precision {
        Precision::F32 => execute::<f32>(&spec, &dir, &extra_meta),
        Precision::F64 => execute::<f64>(&spec, &dir, &extra_meta),
    }
}

fn cmd_toy(args: &ToyArgs) -> Result<(), Failure> {
    let mode = match args.mode {
        ToyMode::Shift => "shift",
        ToyMode::Rotate => "rotate",
    };
    let extra = [
        ("task", Some("toy")),
        ("mode", Some(mode)),
        ("grid", args.grid.as_deref()),
    ];
    let s = settings(&args.common, &extra)?;
    let mut spec = s.to_spec().map_err(usage)?;
    spec.record_timing = args.common.timing;
    let dir = out_dir(&args.common, &s);
    match args.common.precision {
        Precision::F32 => execute::<f32>(&spec, &dir, ""),
        Precision::F64 => execute::<f64>(&spec, &dir, ""),
    }
}

fn cmd_diagnose(args: &DiagnoseArgs) -> Result<(), Failure> {
    let mut s = Settings::new();
    s.set("task", &args.task).map_err(usage)?;
    s.set("gamma", &args.gamma).map_err(usage)?;
    s.set("seed", &args.seed.to_string()).map_err(usage)?;
    let spec = s.to_spec().map_err(usage)?;
    let rows = match args.precision {
        Precision::F32 => diagnose::<f32>(&spec, args.m, args.n),
        Precision::F64 => diagnose::<f64>(&spec, args.m, args.n),
    };
    let rows = rows.map_err(|e| match e {
        Error::InvalidParameter(_) | Error::UnknownKind(_) => Failure::Usage(e.to_string()),
        other => Failure::Runtime(other.into()),
    })?;
    let text = diagnostics_to_csv(&rows);
    match &args.out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            fs::write(dir.join("diagnostics.csv"), text).context("writing diagnostics.csv")?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_selftest() -> Result<(), Failure> {
    let checks = run_selftest();
    for c in &checks {
        println!(
            "{} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(anyhow!("{failed} of {} checks failed", checks.len()).into());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Toy(a) => cmd_toy(a),
        Command::Diagnose(a) => cmd_diagnose(a),
        Command::Selftest => cmd_selftest(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
