//! `key = value` settings shared by the config file and the command line.
//!
//! Keys mirror the CLI flags without their leading dashes (`n-q`, `alpha`,
//! …). Lines starting with `#` are comments. Later settings override
//! earlier ones, so flags applied after a file take precedence.

use std::collections::BTreeMap;

use super::experiment::{
    parse_grid, parse_seeds, DegradationMode, ExperimentSpec, Method, Profile,
};
use crate::error::{Error, Result};
use crate::tasks::TaskKind;

/// Every key understood by [`Settings::to_spec`].
pub const KNOWN_KEYS: [&str; 16] = [
    "task", "gamma", "beta", "grid", "mode", "methods", "m", "trials", "seeds", "alpha", "n-q",
    "n-train", "profile", "seed", "draws", "out",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses a config file body.
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Self::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::InvalidParameter(format!("config line {}: expected `key = value`", i + 1))
            })?;
            s.set(k.trim(), v.trim())?;
        }
        Ok(s)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.replace('_', "-");
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(Error::InvalidParameter(format!("unknown setting `{key}`")));
        }
        self.values.insert(key, value.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Applies `other` on top of `self`.
    pub fn merge(&mut self, other: &Settings) {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::InvalidParameter(format!("bad value for `{key}`: `{v}`")))
            })
            .transpose()
    }

    /// Builds an experiment, falling back to the profile's defaults.
    ///
    /// `methods` accepts `all`, explicit names, and the bare word `uniform`,
    /// which expands to one uniform test per calibration size in `m`
    /// (default 200). `seeds` is either a comma list or a count `n` meaning
    /// seeds `0..n`.
    pub fn to_spec(&self) -> Result<ExperimentSpec> {
        let profile: Profile = self.parsed("profile")?.unwrap_or_default();
        let mut spec = ExperimentSpec::with_profile(profile);
        if let Some(task) = self.parsed::<TaskKind>("task")? {
            spec.task = task;
        }
        let toy = spec.task == TaskKind::Toy;
        if toy {
            spec.mode = DegradationMode::ToyRotate;
            spec.n_q = 100;
        }
        if let Some(mode) = self.parsed::<DegradationMode>("mode")? {
            spec.mode = mode;
        }
        if let Some(g) = self.get("gamma") {
            spec.gammas = parse_grid(g)?;
        }
        if let Some(b) = self.get("grid").or(self.get("beta")) {
            spec.betas = parse_grid(b)?;
        }
        let m_list: Vec<usize> = match self.get("m") {
            Some(v) => v
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<usize>()
                        .ok()
                        .filter(|&m| m > 0)
                        .ok_or_else(|| {
                            Error::InvalidParameter(format!("bad calibration size `{t}`"))
                        })
                })
                .collect::<Result<_>>()?,
            None if toy => vec![10],
            None => vec![200],
        };
        spec.methods = match self.get("methods") {
            Some(list) => {
                let mut out = Vec::new();
                for item in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                    if item == "uniform" || item == "conformal_uniform" {
                        out.extend(m_list.iter().map(|&m| Method::ConformalUniform(m)));
                    } else {
                        out.extend(Method::parse_list(item)?);
                    }
                }
                out.sort();
                out.dedup();
                if out.is_empty() {
                    return Err(Error::InvalidParameter("empty method list".into()));
                }
                out
            }
            None if toy => {
                let mut v: Vec<Method> = m_list
                    .iter()
                    .map(|&m| Method::ConformalUniform(m))
                    .collect();
                v.push(Method::C2st);
                v
            }
            None if self.get("m").is_some() => {
                let mut v: Vec<Method> = m_list
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
            None => Method::standard_set(),
        };
        if let Some(t) = self.parsed("trials")? {
            spec.trials = t;
        }
        if let Some(s) = self.get("seeds") {
            spec.seeds = if s.contains(',') {
                parse_seeds(s)?
            } else {
                let n: u64 = s
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("bad seed count `{s}`")))?;
                (0..n).collect()
            };
        }
        if let Some(a) = self.parsed("alpha")? {
            spec.alpha = a;
        }
        if let Some(n) = self.parsed("n-q")? {
            spec.n_q = n;
        }
        if let Some(n) = self.parsed("n-train")? {
            spec.n_train = n;
        }
        if let Some(s) = self.parsed("seed")? {
            spec.seed = s;
        }
        if let Some(d) = self.parsed("draws")? {
            spec.posterior_draws = d;
        }
        spec.validate()?;
        Ok(spec)
    }
}
