//! Quick built-in checks against closed-form values, for `c2st selftest`.

use super::csv::{rows_from_csv, rows_to_csv};
use super::experiment::{DegradationMode, ExperimentSpec, Method};
use super::run::run_experiment;
use crate::classifier::{init_network, MlpScore, TrainConfig};
use crate::conformal::{auc_with_se, conformal_pvalue, uniform_pvalues};
use crate::error::Result;
use crate::numerics::{
    ks_statistic, ks_uniformity_test, std_normal_cdf, KsAlternative, KsDecision, Matrix, RngStream,
};
use crate::tasks::{GaussianTask, PerturbationKind, ShiftTask1d, TaskKind, TaskPair};

#[derive(Debug, Clone, PartialEq)]
pub struct SelfCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> SelfCheck {
    let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
    SelfCheck {
        name,
        passed,
        detail,
    }
}

fn cholesky() -> Result<(bool, String)> {
    let b = Matrix::from_fn(6, 6, |i, j| {
        ((i * 7 + j * 3) % 5) as f64 - 2.0 + if i == j { 3.0 } else { 0.0 }
    });
    let a = b.matmul(&b.transpose())?.add(&Matrix::identity(6))?;
    let l = a.cholesky()?;
    let err = l.matmul(&l.transpose())?.max_abs_diff(&a)?;
    Ok((err < 1e-10, format!("max |LLᵀ − A| = {err:.2e}")))
}

fn ks_known() -> Result<(bool, String)> {
    let d = ks_statistic(&[0.7, 0.1, 0.4])?;
    Ok(((d - 0.3f64).abs() < 1e-12, format!("D = {d}, expected 0.3")))
}

fn pvalue_exact() -> Result<(bool, String)> {
    let u: f64 = conformal_pvalue(&[1.0, 2.0, 3.0], &2.0, 0.5)?;
    let lo: f64 = conformal_pvalue(&[1.0, 2.0, 3.0], &0.0, 1.0)?;
    let ok = (u - 0.5).abs() < 1e-15 && (lo - 0.25).abs() < 1e-15;
    Ok((ok, format!("U = {u} (0.5), U = {lo} (0.25)")))
}

fn null_uniformity() -> Result<(bool, String)> {
    let task = GaussianTask::<f64>::builder(PerturbationKind::CovScaling)
        .gamma(0.0)
        .build()?;
    let model = init_network(
        task.theta_dim() + task.y_dim(),
        &TrainConfig::fast().with_seed(3),
    )?;
    let batch = uniform_pvalues(&MlpScore::new(model), &task, 5, 5000, RngStream::new(11, 0))?;
    let ks = ks_uniformity_test(
        &batch.values,
        0.001,
        KsAlternative::TwoSided,
        KsDecision::Series,
    )?;
    Ok((
        !ks.reject,
        format!("D = {:.4}, p = {:.3}", ks.statistic, ks.p_value),
    ))
}

fn auc_closed_form() -> Result<(bool, String)> {
    let task = ShiftTask1d::new(0.5f64)?;
    let mut rng = RngStream::new(5, 0).rng();
    let n = 20_000;
    let lr = |x| task.oracle_log_ratio(&x).expect("oracle");
    let sp: Vec<f64> = (0..n).map(|_| lr(task.sample_true(&mut rng))).collect();
    let sq: Vec<f64> = (0..n).map(|_| lr(task.sample_approx(&mut rng))).collect();
    let a = auc_with_se(&sp, &sq)?;
    let exact = std_normal_cdf(0.5 / 2f64.sqrt());
    let z = (a.auc - exact) / a.se;
    Ok((
        z.abs() < 4.0,
        format!("AUC = {:.4}, exact {exact:.4}, z = {z:.2}", a.auc),
    ))
}

fn run_round_trip() -> Result<(bool, String)> {
    let spec = ExperimentSpec {
        task: TaskKind::Toy,
        mode: DegradationMode::ToyShift,
        betas: vec![-0.5, 0.5],
        methods: vec![Method::ConformalUniform(5), Method::C2st],
        n_q: 50,
        trials: 20,
        seeds: vec![0, 1],
        ..ExperimentSpec::default()
    };
    let a = rows_to_csv(&run_experiment::<f64>(&spec)?);
    let b = rows_to_csv(&run_experiment::<f64>(&spec)?);
    let back = rows_to_csv(&rows_from_csv(&a)?);
    Ok((
        a == b && a == back,
        format!(
            "{} rows, repeat and re-parse identical",
            a.lines().count() - 1
        ),
    ))
}

/// Runs every check; all should pass on a healthy build.
pub fn run_selftest() -> Vec<SelfCheck> {
    vec![
        check("cholesky_reconstruction", cholesky),
        check("ks_statistic_known_value", ks_known),
        check("conformal_pvalue_exact", pvalue_exact),
        check("null_pvalues_uniform", null_uniformity),
        check("auc_closed_form", auc_closed_form),
        check("experiment_deterministic_csv", run_round_trip),
    ]
}

#[cfg(test)]
mod tests {
    #[test]
    fn selftest_passes() {
        for c in super::run_selftest() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
