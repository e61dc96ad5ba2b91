//! Performance profiles.
//!
//! For solver `s` and instance `i` the ratio `r = t(i,s) / min_s t(i,s)`;
//! the profile `k_s(τ)` is the share of instances with `r ≤ τ`. Timeouts are
//! infinite times. Instances on which every solver timed out are dropped.

use std::collections::BTreeMap;
use std::io::Write;

use regenloc::{Error, Result};
use serde::Serialize;

use crate::experiment::{ResultRow, Status};

/// Times below this (in milliseconds) count as this.
pub const TIME_FLOOR_MS: f64 = 1e-3;

/// Per-instance times, `times[i][s]` for `solvers[s]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileInput {
    pub solvers: Vec<String>,
    pub times: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub solver: String,
    pub tau: f64,
    pub k: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCurve {
    pub solver: String,
    /// `(τ, k_s(τ))` at every breakpoint, τ ascending, first τ = 1.
    pub points: Vec<(f64, f64)>,
}

impl ProfileCurve {
    /// `k_s(τ)` for any `τ ≥ 1` (step function, right-continuous).
    pub fn at(&self, tau: f64) -> f64 {
        self.points
            .iter()
            .take_while(|(t, _)| *t <= tau)
            .last()
            .map_or(0.0, |(_, k)| *k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub curves: Vec<ProfileCurve>,
    /// Instances kept after dropping all-timeout ones.
    pub instances: usize,
    pub excluded: usize,
}

pub fn performance_profile(input: &ProfileInput) -> Result<Profile> {
    let s_count = input.solvers.len();
    if s_count == 0 {
        return Err(Error::InvalidArgument("no solvers to profile".into()));
    }
    if input.times.iter().any(|row| row.len() != s_count) {
        return Err(Error::InvalidArgument(
            "every instance needs one time per solver".into(),
        ));
    }
    if input.times.iter().flatten().any(|t| t.is_nan() || *t < 0.0) {
        return Err(Error::InvalidArgument("times must be nonnegative".into()));
    }
    let mut ratios: Vec<Vec<f64>> = Vec::new();
    let mut excluded = 0;
    for row in &input.times {
        let clamped: Vec<f64> = row.iter().map(|t| t.max(TIME_FLOOR_MS)).collect();
        let best = clamped.iter().copied().fold(f64::INFINITY, f64::min);
        if best.is_infinite() {
            excluded += 1;
            continue;
        }
        ratios.push(clamped.iter().map(|t| t / best).collect());
    }
    if excluded > 0 {
        log::warn!("{excluded} instance(s) dropped from the profile: every solver timed out");
    }
    let total = ratios.len();
    if total == 0 {
        return Err(Error::InvalidArgument(
            "no instance solved by any solver".into(),
        ));
    }
    let mut taus: Vec<f64> = ratios
        .iter()
        .flatten()
        .copied()
        .filter(|r| r.is_finite())
        .collect();
    taus.push(1.0);
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    let curves = (0..s_count)
        .map(|s| {
            let mut mine: Vec<f64> = ratios.iter().map(|r| r[s]).collect();
            mine.sort_by(f64::total_cmp);
            let mut idx = 0;
            let points = taus
                .iter()
                .map(|&tau| {
                    while idx < mine.len() && mine[idx] <= tau {
                        idx += 1;
                    }
                    (tau, idx as f64 / total as f64)
                })
                .collect();
            ProfileCurve {
                solver: input.solvers[s].clone(),
                points,
            }
        })
        .collect();
    Ok(Profile {
        curves,
        instances: total,
        excluded,
    })
}

/// Groups a results table by instance (experiment, cell, seed). Failed
/// solves count as timeouts; solvers missing from an instance too.
pub fn input_from_rows(rows: &[ResultRow]) -> ProfileInput {
    let mut solvers: Vec<String> = Vec::new();
    for r in rows {
        if !solvers.contains(&r.method) {
            solvers.push(r.method.clone());
        }
    }
    let mut by_instance: BTreeMap<(String, usize, usize, usize, u64), Vec<f64>> = BTreeMap::new();
    for r in rows {
        let key = (r.experiment.clone(), r.n, r.gamma_e, r.gamma_v, r.seed);
        let slot = by_instance
            .entry(key)
            .or_insert_with(|| vec![f64::INFINITY; solvers.len()]);
        let s = solvers
            .iter()
            .position(|m| *m == r.method)
            .expect("collected above");
        slot[s] = if r.status == Status::Ok {
            r.time_ms
        } else {
            f64::INFINITY
        };
    }
    ProfileInput {
        solvers,
        times: by_instance.into_values().collect(),
    }
}

pub fn write_profile<W: Write>(out: W, profile: &Profile) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for curve in &profile.curves {
        for &(tau, k) in &curve.points {
            writer
                .serialize(ProfilePoint {
                    solver: curve.solver.clone(),
                    tau,
                    k,
                })
                .map_err(|e| Error::Internal(e.to_string()))?;
        }
    }
    writer.flush().map_err(|e| Error::Internal(e.to_string()))?;
    Ok(())
}
