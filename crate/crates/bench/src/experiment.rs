//! Experiment runner and the results table.

use std::io::{Read, Write};

use rayon::prelude::*;
use regenloc::instance::{derive_seed, generate_instance, GeneratorParams};
use regenloc::methods::{solve, Method, SolveOptions};
use regenloc::rational::{format_rational, to_f64};
use regenloc::{Error, NetworkInstance, Rational, Result};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

/// Redraws allowed per instance slot before giving up.
pub const MAX_RESAMPLES: u64 = 100;

/// One line of the results CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultRow {
    pub experiment: String,
    pub n: usize,
    pub gamma_e: usize,
    pub gamma_v: usize,
    pub seed: u64,
    pub method: String,
    /// Exact objective; empty unless `status` is `ok`.
    pub objective: String,
    pub r_dwc: Option<f64>,
    pub r_rsb: Option<f64>,
    pub iterations: Option<usize>,
    /// Wall time in milliseconds; `inf` for timeouts.
    pub time_ms: f64,
    pub status: Status,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Timeout,
    Infeasible,
    Error,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunSummary {
    pub rows: usize,
    pub resampled: u64,
    pub timeouts: usize,
    pub abandoned: usize,
}

struct Outcome {
    method: Method,
    objective: Option<Rational>,
    iterations: Option<usize>,
    time_ms: f64,
    status: Status,
}

/// Seed for slot `index` of size `n`; shared by every budget cell so the
/// cells compare the same networks.
pub fn slot_seed(master: u64, n: usize, index: usize) -> u64 {
    derive_seed(master, ((n as u64) << 32) | index as u64)
}

fn run_slot(
    cfg: &ExperimentConfig,
    opts: &SolveOptions,
    n: usize,
    ge: usize,
    gv: usize,
    index: usize,
) -> (u64, Vec<Outcome>, u64) {
    let base = slot_seed(cfg.master_seed, n, index);
    let mut last = Vec::new();
    let mut seed = base;
    for attempt in 0..MAX_RESAMPLES {
        seed = if attempt == 0 {
            base
        } else {
            derive_seed(base, attempt)
        };
        let params = GeneratorParams {
            n,
            density: cfg.density,
            d_max: cfg.d_max.clone(),
            gamma_e: ge,
            gamma_v: gv,
            horizon: cfg.horizon,
            seed,
        };
        let inst = match generate_instance(&params) {
            Ok(inst) => inst,
            Err(err) => {
                log::warn!("n={n} slot {index}: {err}");
                return (seed, failed(cfg, Status::Error), attempt);
            }
        };
        let outcomes = run_methods(cfg, opts, &inst);
        if outcomes.iter().any(|o| o.status == Status::Infeasible) {
            log::warn!("n={n} gamma=({ge},{gv}) slot {index}: seed {seed} infeasible, resampling");
            last = outcomes;
            continue;
        }
        return (seed, outcomes, attempt);
    }
    log::warn!("n={n} slot {index}: no feasible instance after {MAX_RESAMPLES} draws");
    (seed, last, MAX_RESAMPLES)
}

fn failed(cfg: &ExperimentConfig, status: Status) -> Vec<Outcome> {
    cfg.methods
        .iter()
        .map(|&method| Outcome {
            method,
            objective: None,
            iterations: None,
            time_ms: f64::INFINITY,
            status,
        })
        .collect()
}

fn run_methods(
    cfg: &ExperimentConfig,
    opts: &SolveOptions,
    inst: &NetworkInstance,
) -> Vec<Outcome> {
    cfg.methods
        .iter()
        .map(|&method| match solve(inst, method, opts) {
            Ok(report) => Outcome {
                method,
                objective: Some(report.objective),
                iterations: Some(report.iterations),
                time_ms: report.wall_time.as_secs_f64() * 1e3,
                status: Status::Ok,
            },
            Err(err) => {
                let status = match err {
                    Error::Timeout => Status::Timeout,
                    Error::InfeasibleInstance(_) | Error::GameInfeasible(_) => Status::Infeasible,
                    other => {
                        log::warn!("{method} failed: {other}");
                        Status::Error
                    }
                };
                Outcome {
                    method,
                    objective: None,
                    iterations: None,
                    time_ms: f64::INFINITY,
                    status,
                }
            }
        })
        .collect()
}

/// `100 · (reference − x) / reference`.
pub fn relative_gain(reference: &Rational, x: &Rational) -> Option<f64> {
    if *reference == Rational::from_integer(0.into()) {
        return None;
    }
    Some(100.0 * to_f64(&((reference - x) / reference)))
}

/// Runs every cell of `cfg`; rows come out in (cell, slot, method) order
/// whatever the thread count.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(Vec<ResultRow>, RunSummary)> {
    let opts = SolveOptions {
        epsilon: None,
        time_limit: Some(cfg.time_limit),
        max_iter: cfg.max_iter,
        eta_d: cfg.eta_d.clone(),
        complete_shortcut: false,
    };
    let jobs: Vec<(usize, usize, usize, usize)> = cfg
        .cells()
        .into_iter()
        .flat_map(|(n, ge, gv)| (0..cfg.instances).map(move |i| (n, ge, gv, i)))
        .collect();
    let work = || {
        jobs.par_iter()
            .map(|&(n, ge, gv, i)| (n, ge, gv, run_slot(cfg, &opts, n, ge, gv, i)))
            .collect::<Vec<_>>()
    };
    let results = match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Internal(e.to_string()))?
            .install(work),
        None => work(),
    };
    let mut rows = Vec::new();
    let mut summary = RunSummary::default();
    for (n, ge, gv, (seed, outcomes, resampled)) in results {
        summary.resampled += resampled;
        if outcomes.iter().any(|o| o.status == Status::Infeasible) {
            summary.abandoned += 1;
        }
        let find = |m: Method| {
            outcomes
                .iter()
                .find(|o| o.method == m)
                .and_then(|o| o.objective.clone())
        };
        let dwc = find(Method::Dwc);
        let rsb = find(Method::Rsb);
        for o in &outcomes {
            if o.status == Status::Timeout {
                summary.timeouts += 1;
            }
            let gain = |reference: &Option<Rational>| match (reference, &o.objective) {
                (Some(r), Some(x)) => relative_gain(r, x),
                _ => None,
            };
            rows.push(ResultRow {
                experiment: cfg.experiment.name().to_string(),
                n,
                gamma_e: ge,
                gamma_v: gv,
                seed,
                method: o.method.name().to_string(),
                objective: o
                    .objective
                    .as_ref()
                    .map(format_rational)
                    .unwrap_or_default(),
                r_dwc: gain(&dwc),
                r_rsb: gain(&rsb),
                iterations: o.iterations,
                time_ms: o.time_ms,
                status: o.status,
            });
        }
    }
    summary.rows = rows.len();
    Ok((rows, summary))
}

pub fn write_results<W: Write>(out: W, rows: &[ResultRow]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row).map_err(csv_error)?;
    }
    writer.flush().map_err(|e| Error::Internal(e.to_string()))?;
    Ok(())
}

/// Reads a results table; the header must match the written one.
pub fn read_results<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut reader = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for record in reader.deserialize() {
        let row: ResultRow = record.map_err(csv_error)?;
        if row.time_ms.is_nan() || row.time_ms < 0.0 {
            return Err(Error::Validation {
                field: "time_ms".into(),
                message: "must be a nonnegative number or inf".into(),
            });
        }
        rows.push(row);
    }
    Ok(rows)
}

fn csv_error(err: csv::Error) -> Error {
    let (line, column) = match err.position() {
        Some(p) => (p.line() as usize, 0),
        None => (0, 0),
    };
    Error::Parse {
        line,
        column,
        message: err.to_string(),
    }
}

/// Mean of a column over the rows of one method that solved.
pub fn mean_of(
    rows: &[ResultRow],
    method: Method,
    field: impl Fn(&ResultRow) -> Option<f64>,
) -> Option<f64> {
    let values: Vec<f64> = rows
        .iter()
        .filter(|r| r.method == method.name() && r.status == Status::Ok)
        .filter_map(field)
        .collect();
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}
