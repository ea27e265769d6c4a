//! Expected-p-value diagnostics over a γ grid.

use std::fmt::Write as _;

use super::csv::format_real;
use super::experiment::ExperimentSpec;
use super::run::build_task;
use crate::conformal::{expected_pvalue_diagnostics, Estimate};
use crate::error::Result;
use crate::numerics::RngStream;
use crate::scalar::Scalar;

pub const DIAGNOSTIC_HEADER: &str =
    "task,gamma,m,n,mean_u,mean_u_se,one_minus_auc,one_minus_auc_se,ratio_spread,ratio_spread_se";

/// The three estimates of `E[U]` at one γ, using the oracle ratio as score.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticRow {
    pub task: String,
    pub gamma: f64,
    pub m: usize,
    pub n: usize,
    pub mean_u: Estimate<f64>,
    pub one_minus_auc: Estimate<f64>,
    pub ratio_spread: Estimate<f64>,
}

fn lossy<T: Scalar>(e: Estimate<T>) -> Estimate<f64> {
    Estimate {
        value: e.value.to_f64_lossy(),
        se: e.se.to_f64_lossy(),
    }
}

/// One row per γ of `spec`; fails for tasks without an oracle ratio.
pub fn diagnose<T: Scalar>(
    spec: &ExperimentSpec,
    m: usize,
    n: usize,
) -> Result<Vec<DiagnosticRow>> {
    let root = RngStream::new(spec.seed, 0).named("diagnose");
    spec.gammas
        .iter()
        .enumerate()
        .map(|(gi, &gamma)| {
            let task = build_task::<T>(spec, gamma)?;
            let d = expected_pvalue_diagnostics(task.as_ref(), m, n, root.child(gi as u64))?;
            Ok(DiagnosticRow {
                task: spec.task.as_str().to_string(),
                gamma,
                m,
                n,
                mean_u: lossy(d.mean_u),
                one_minus_auc: lossy(d.one_minus_auc),
                ratio_spread: lossy(d.ratio_spread),
            })
        })
        .collect()
}

pub fn diagnostics_to_csv(rows: &[DiagnosticRow]) -> String {
    let mut out = format!("{DIAGNOSTIC_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.task,
            format_real(r.gamma),
            r.m,
            r.n,
            format_real(r.mean_u.value),
            format_real(r.mean_u.se),
            format_real(r.one_minus_auc.value),
            format_real(r.one_minus_auc.se),
            format_real(r.ratio_spread.value),
            format_real(r.ratio_spread.se),
        );
    }
    out
}
