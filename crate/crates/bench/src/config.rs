//! Experiment configuration files.
//!
//! Same JSON conventions as instance files. Every field except `experiment`
//! is optional; missing fields take the preset of the named experiment.
//!
//! ```json
//! { "experiment": "exp1", "instances": 5, "master_seed": 7 }
//! ```

use std::time::Duration;

use regenloc::io::{parse_json, Exact};
use regenloc::methods::Method;
use regenloc::rational::{int, ratio};
use regenloc::{Error, Rational, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentId {
    Exp1,
    Exp2,
    Exp3,
    Exp4,
    Custom,
}

impl ExperimentId {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::Exp1 => "exp1",
            ExperimentId::Exp2 => "exp2",
            ExperimentId::Exp3 => "exp3",
            ExperimentId::Exp4 => "exp4",
            ExperimentId::Custom => "custom",
        }
    }
}

/// The file as written; all but `experiment` optional.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment: Option<ExperimentId>,
    pub n_values: Option<Vec<usize>>,
    pub gamma_e: Option<Vec<usize>>,
    pub gamma_v: Option<Vec<usize>>,
    pub instances: Option<usize>,
    pub methods: Option<Vec<String>>,
    pub d_max: Option<Exact>,
    pub density: Option<f64>,
    pub horizon: Option<usize>,
    pub eta_d: Option<Exact>,
    pub max_iter: Option<usize>,
    pub master_seed: Option<u64>,
    pub time_limit_s: Option<f64>,
    pub scale: Option<f64>,
    pub threads: Option<usize>,
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub n_values: Vec<usize>,
    pub gamma_e: Vec<usize>,
    pub gamma_v: Vec<usize>,
    pub instances: usize,
    pub methods: Vec<Method>,
    pub d_max: Rational,
    pub density: f64,
    pub horizon: usize,
    pub eta_d: Rational,
    pub max_iter: usize,
    pub master_seed: u64,
    pub time_limit: Duration,
    /// Shrink factor already applied to `n_values` and `instances`.
    pub scale: f64,
    pub threads: Option<usize>,
}

const SMALL: [Method; 3] = [Method::Dwc, Method::Rsb, Method::Rdb];
const LARGE: [Method; 5] = [
    Method::Dwc,
    Method::Bdc,
    Method::Ccg,
    Method::Iro,
    Method::Hsl,
];

impl ExperimentConfig {
    /// Settings of the four experiments: 50 instances per cell, `d_max`
    /// 1000, density 0.3, three periods, 60 s per solve.
    pub fn preset(id: ExperimentId) -> Self {
        let (n_values, gamma_e, gamma_v, methods, max_iter): (Vec<usize>, _, _, Vec<Method>, _) =
            match id {
                ExperimentId::Exp1 => (
                    (10..=30).step_by(2).collect(),
                    vec![2],
                    vec![2],
                    SMALL.to_vec(),
                    50,
                ),
                ExperimentId::Exp2 => (vec![25], vec![1, 2], vec![1, 2, 3], SMALL.to_vec(), 50),
                ExperimentId::Exp3 => (
                    (40..=60).step_by(2).collect(),
                    vec![2],
                    vec![2],
                    LARGE.to_vec(),
                    50,
                ),
                ExperimentId::Exp4 => (vec![50], vec![1, 2], vec![1, 2, 3], LARGE.to_vec(), 10),
                ExperimentId::Custom => (vec![10], vec![1], vec![1], SMALL.to_vec(), 50),
            };
        ExperimentConfig {
            experiment: id,
            n_values,
            gamma_e,
            gamma_v,
            instances: 50,
            methods,
            d_max: int(1000),
            density: 0.3,
            horizon: 3,
            eta_d: ratio(1, 10),
            max_iter,
            master_seed: 0,
            time_limit: Duration::from_secs(60),
            scale: 1.0,
            threads: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ConfigFile = parse_json(text)?;
        Self::resolve(file, None)
    }

    /// Merges `file` over its preset, then applies the scale (the
    /// `scale_override` wins over the file's).
    pub fn resolve(file: ConfigFile, scale_override: Option<f64>) -> Result<Self> {
        let id = file
            .experiment
            .ok_or_else(|| invalid("experiment", "missing experiment id"))?;
        let mut cfg = Self::preset(id);
        if let Some(v) = file.n_values {
            cfg.n_values = v;
        }
        if let Some(v) = file.gamma_e {
            cfg.gamma_e = v;
        }
        if let Some(v) = file.gamma_v {
            cfg.gamma_v = v;
        }
        if let Some(v) = file.instances {
            cfg.instances = v;
        }
        if let Some(v) = file.methods {
            cfg.methods = v.iter().map(|m| m.parse()).collect::<Result<_>>()?;
        }
        if let Some(v) = file.d_max {
            cfg.d_max = v.0;
        }
        if let Some(v) = file.density {
            cfg.density = v;
        }
        if let Some(v) = file.horizon {
            cfg.horizon = v;
        }
        if let Some(v) = file.eta_d {
            cfg.eta_d = v.0;
        }
        if let Some(v) = file.max_iter {
            cfg.max_iter = v;
        }
        if let Some(v) = file.master_seed {
            cfg.master_seed = v;
        }
        if let Some(v) = file.time_limit_s {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid("time_limit_s", "must be positive"));
            }
            cfg.time_limit = Duration::from_secs_f64(v);
        }
        cfg.threads = file.threads;
        let scale = scale_override.or(file.scale).unwrap_or(1.0);
        cfg.validate()?;
        cfg.apply_scale(scale)?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(invalid("methods", "at least one method required"));
        }
        if self.instances == 0 {
            return Err(invalid(
                "instances",
                "at least one instance per cell required",
            ));
        }
        if self.n_values.is_empty() || self.n_values.iter().any(|&n| n < 2) {
            return Err(invalid(
                "n_values",
                "need at least one size, each at least 2",
            ));
        }
        if self.gamma_e.is_empty() || self.gamma_v.is_empty() {
            return Err(invalid("gamma_e", "budget lists must be nonempty"));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(invalid("density", "must lie in (0, 1]"));
        }
        if self.horizon == 0 {
            return Err(invalid("horizon", "must be at least 1"));
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter", "must be at least 1"));
        }
        if self.eta_d < Rational::from_integer(0.into()) {
            return Err(invalid("eta_d", "must be nonnegative"));
        }
        if self.threads == Some(0) {
            return Err(invalid("threads", "must be at least 1"));
        }
        Ok(())
    }

    /// Multiplies sizes and instance counts by `scale` (rounded, sizes at
    /// least 3, counts at least 1, duplicate sizes dropped).
    fn apply_scale(&mut self, scale: f64) -> Result<()> {
        if !(scale.is_finite() && scale > 0.0 && scale <= 1.0) {
            return Err(invalid("scale", "must lie in (0, 1]"));
        }
        self.scale = scale;
        if scale == 1.0 {
            return Ok(());
        }
        let mut sizes: Vec<usize> = self
            .n_values
            .iter()
            .map(|&n| ((n as f64 * scale).round() as usize).max(3))
            .collect();
        sizes.dedup();
        self.n_values = sizes;
        self.instances = ((self.instances as f64 * scale).round() as usize).max(1);
        Ok(())
    }

    /// Parameter cells in output order.
    pub fn cells(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for &n in &self.n_values {
            for &ge in &self.gamma_e {
                for &gv in &self.gamma_v {
                    out.push((n, ge, gv));
                }
            }
        }
        out
    }
}

fn invalid(field: &str, message: &str) -> Error {
    Error::Validation {
        field: field.to_string(),
        message: message.to_string(),
    }
}
