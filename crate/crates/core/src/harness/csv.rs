//! Result tables as comma-separated text.
//!
//! Reals are written with 12 significant digits in the shortest decimal
//! form that reads back to the same rounded value, always with `.` as the
//! decimal point.

use std::fs;
use std::path::Path;

use super::run::ResultRow;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str =
    "task,gamma,beta,method,m,seed,trials,rejection_rate,mean_statistic,wall_time_s";

/// `x` rounded to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

pub fn format_real(x: f64) -> String {
    let r = round12(x);
    // normalise -0 so identical runs stay byte-identical
    if r == 0.0 {
        "0".to_string()
    } else {
        format!("{r}")
    }
}

pub fn rows_to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let fields = [
            r.task.clone(),
            format_real(r.gamma),
            format_real(r.beta),
            r.method.clone(),
            r.m.to_string(),
            r.seed.to_string(),
            r.trials.to_string(),
            format_real(r.rejection_rate),
            format_real(r.mean_statistic),
            format_real(r.wall_time_s),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    fs::write(path, rows_to_csv(rows)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn field<T: std::str::FromStr>(line: usize, name: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::InvalidParameter(format!("line {line}: bad {name} `{v}`")))
}

pub fn rows_from_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => {
            return Err(Error::InvalidParameter(format!(
                "unexpected CSV header {:?}",
                other.unwrap_or("")
            )))
        }
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            let line = i + 2;
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 10 {
                return Err(Error::InvalidParameter(format!(
                    "line {line}: expected 10 fields, got {}",
                    f.len()
                )));
            }
            Ok(ResultRow {
                task: f[0].to_string(),
                gamma: field(line, "gamma", f[1])?,
                beta: field(line, "beta", f[2])?,
                method: f[3].to_string(),
                m: field(line, "m", f[4])?,
                seed: field(line, "seed", f[5])?,
                trials: field(line, "trials", f[6])?,
                rejection_rate: field(line, "rejection_rate", f[7])?,
                mean_statistic: field(line, "mean_statistic", f[8])?,
                wall_time_s: field(line, "wall_time_s", f[9])?,
            })
        })
        .collect()
}

pub fn load_csv(path: &Path) -> Result<Vec<ResultRow>> {
    rows_from_csv(
        &fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
    )
}
