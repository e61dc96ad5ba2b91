//! Learning-based hide-and-seek game.
//!
//! The hider owns the per-period edge deviations `d_e^t ∈ [0, d_e]` and
//! nudges them along a sensitivity estimate; the seeker answers each table
//! with an exact best placement on the graph certified in every period.
//! The derivative of the seeker's loss with respect to a deviation is not
//! defined (the loss is piecewise constant), so it is estimated by a finite
//! difference to the edge's cap, with a criticality score as fallback.

use std::collections::HashMap;
use std::time::Instant;

use num_traits::{Signed, Zero};

use crate::cds::{verify_placement, Placement, ScaledNodes};
use crate::methods::{
    check_deadline, place, trace_row, DeviationChange, Method, SolveOptions, SolveReport,
};
use crate::paths::{certificates, robust_row, worst_period_graph, Certificate, TransformedGraph};
use crate::{Error, NetworkInstance, Rational, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameState {
    pub k: usize,
    /// `[t][e]`, always inside `[0, d_e]`.
    pub deviations: Vec<Vec<Rational>>,
    pub placement: Option<Placement>,
    pub eta_d: Rational,
    pub loss_history: Vec<Rational>,
}

impl GameState {
    /// Deviations start at the instance's period caps.
    pub fn new(inst: &NetworkInstance, eta_d: Rational) -> Result<Self> {
        if eta_d.is_negative() {
            return Err(Error::InvalidArgument("eta_d must be nonnegative".into()));
        }
        Ok(GameState {
            k: 0,
            deviations: inst.deviation_table(),
            placement: None,
            eta_d,
            loss_history: Vec::new(),
        })
    }
}

/// Graph of pairs certified within `d_max` in every period of `table`.
pub fn seeker_graph(inst: &NetworkInstance, table: &[Vec<Rational>]) -> Result<TransformedGraph> {
    let m = worst_period_graph(inst, table, inst.gamma_e())?;
    if !m.is_connected() {
        return Err(Error::GameInfeasible(
            "communication graph disconnected under the hider's deviations".into(),
        ));
    }
    Ok(m)
}

/// Best response to the current deviations: cheapest worst-case placement
/// that stays connected in every period.
pub fn seeker_step(state: &GameState, inst: &NetworkInstance) -> Result<Placement> {
    seeker_with(state, inst, &SolveOptions::default(), None)
}

fn seeker_with(
    state: &GameState,
    inst: &NetworkInstance,
    opts: &SolveOptions,
    deadline: Option<Instant>,
) -> Result<Placement> {
    let m = seeker_graph(inst, &state.deviations)?;
    let nodes = ScaledNodes::new(inst)?;
    place(&m, &nodes.budgeted(inst.gamma_v()), opts, deadline)
}

/// Shared data for evaluating many sensitivities against one state.
struct Probe<'a> {
    inst: &'a NetworkInstance,
    opts: &'a SolveOptions,
    deadline: Option<Instant>,
    deviations: &'a [Vec<Rational>],
    m: TransformedGraph,
    nodes: ScaledNodes,
    placement: Placement,
    /// Certification routes of the links of `m`, per period.
    certs: Vec<Vec<Certificate>>,
    /// Seeker cost after removing a set of links, keyed by the sorted links.
    solved: HashMap<Vec<(usize, usize)>, Rational>,
}

impl<'a> Probe<'a> {
    fn new(
        state: &'a GameState,
        inst: &'a NetworkInstance,
        opts: &'a SolveOptions,
        deadline: Option<Instant>,
    ) -> Result<Self> {
        let m = seeker_graph(inst, &state.deviations)?;
        let nodes = ScaledNodes::new(inst)?;
        let placement = match &state.placement {
            Some(p) => p.clone(),
            None => place(&m, &nodes.budgeted(inst.gamma_v()), opts, deadline)?,
        };
        let links = m.edges();
        let certs = state
            .deviations
            .iter()
            .map(|row| certificates(inst, row, inst.gamma_e(), &links))
            .collect::<Result<Vec<_>>>()?;
        Ok(Probe {
            inst,
            opts,
            deadline,
            deviations: &state.deviations,
            m,
            nodes,
            placement,
            certs,
            solved: HashMap::new(),
        })
    }

    fn sensitivity(&mut self, e: usize, t: usize) -> Result<Rational> {
        let full = &self.inst.edges()[e].max_deviation;
        let current = &self.deviations[t][e];
        let room = full - current;
        if room <= Rational::zero() {
            return Ok(Rational::zero());
        }
        let z_cur = self.placement.objective.clone();
        let z_cap = self.cost_at_cap(e, t)?;
        let delta = &z_cap - &z_cur;
        if !delta.is_zero() {
            return Ok(delta / room);
        }
        let total = self.certs[t].len();
        if total == 0 {
            return Ok(Rational::zero());
        }
        let hits = self.certs[t]
            .iter()
            .filter(|c| c.attacked.contains(&e))
            .count();
        Ok(Rational::new((hits as i64).into(), (total as i64).into()))
    }

    /// Seeker cost with deviation `(e, t)` raised to `d_e`.
    fn cost_at_cap(&mut self, e: usize, t: usize) -> Result<Rational> {
        check_deadline(self.deadline)?;
        let z_cur = self.placement.objective.clone();
        // Only links certified through `e` can lengthen.
        let mut by_source: Vec<(usize, Vec<usize>)> = Vec::new();
        for c in self.certs[t].iter().filter(|c| c.path.contains(&e)) {
            match by_source.last_mut() {
                Some((p, qs)) if *p == c.source => qs.push(c.target),
                _ => by_source.push((c.source, vec![c.target])),
            }
        }
        if by_source.is_empty() {
            return Ok(z_cur);
        }
        let mut raised = self.deviations[t].clone();
        raised[e] = self.inst.edges()[e].max_deviation.clone();
        let mut removed = Vec::new();
        for (p, qs) in by_source {
            let row = robust_row(self.inst, &raised, p, self.inst.gamma_e())?;
            for q in qs {
                if row[q].as_ref().is_none_or(|d| d > self.inst.d_max()) {
                    removed.push((p, q));
                }
            }
        }
        if removed.is_empty() {
            return Ok(z_cur);
        }
        removed.sort_unstable();
        if let Some(z) = self.solved.get(&removed) {
            return Ok(z.clone());
        }
        let kept = self
            .m
            .edges()
            .into_iter()
            .filter(|pq| removed.binary_search(pq).is_err());
        let shrunk = TransformedGraph::from_edges(self.m.n(), kept);
        let z = if !shrunk.is_connected() {
            // The hider can cut the network here; no finite cost to compare.
            z_cur
        } else if verify_placement(&shrunk, &self.placement.selected, None).is_feasible()
            && !(self.opts.complete_shortcut && self.placement.selected.is_empty())
        {
            z_cur
        } else {
            let cost = self.nodes.budgeted(self.inst.gamma_v());
            place(&shrunk, &cost, self.opts, self.deadline)?.objective
        };
        self.solved.insert(removed, z.clone());
        Ok(z)
    }
}

/// Sensitivity of the seeker's cost to deviation `(e, t)`:
/// `(Z_cap − Z_cur) / (d_e − d_e^t)`, 0 when the deviation is at `d_e`, and
/// the share of period-`t` certification routes whose attack includes `e`
/// when the cost does not move.
pub fn estimate_sensitivity(
    state: &GameState,
    inst: &NetworkInstance,
    e: usize,
    t: usize,
) -> Result<Rational> {
    if e >= inst.edges().len() || t >= inst.horizon() {
        return Err(Error::InvalidArgument(format!("no deviation ({e}, {t})")));
    }
    let opts = SolveOptions::default();
    Probe::new(state, inst, &opts, None)?.sensitivity(e, t)
}

/// All sensitivities, `[t][e]`.
pub fn sensitivities(state: &GameState, inst: &NetworkInstance) -> Result<Vec<Vec<Rational>>> {
    sensitivities_with(state, inst, &SolveOptions::default(), None)
}

fn sensitivities_with(
    state: &GameState,
    inst: &NetworkInstance,
    opts: &SolveOptions,
    deadline: Option<Instant>,
) -> Result<Vec<Vec<Rational>>> {
    let mut probe = Probe::new(state, inst, opts, deadline)?;
    (0..inst.horizon())
        .map(|t| {
            (0..inst.edges().len())
                .map(|e| probe.sensitivity(e, t))
                .collect()
        })
        .collect()
}

/// `clamp(d + eta · s, 0, cap)`.
pub fn hider_update(d: &Rational, eta: &Rational, s: &Rational, cap: &Rational) -> Rational {
    let moved = d + eta * s;
    if moved < Rational::zero() {
        Rational::zero()
    } else if moved > *cap {
        cap.clone()
    } else {
        moved
    }
}

/// Gradient step of the hider, projected onto `[0, d_e]`.
pub fn hider_step(state: &GameState, inst: &NetworkInstance, sens: &[Vec<Rational>]) -> GameState {
    let deviations = state
        .deviations
        .iter()
        .zip(sens)
        .map(|(row, s_row)| {
            row.iter()
                .zip(s_row)
                .zip(inst.edges())
                .map(|((d, s), edge)| hider_update(d, &state.eta_d, s, &edge.max_deviation))
                .collect()
        })
        .collect();
    GameState {
        k: state.k + 1,
        deviations,
        placement: state.placement.clone(),
        eta_d: state.eta_d.clone(),
        loss_history: state.loss_history.clone(),
    }
}

fn changes(old: &[Vec<Rational>], new: &[Vec<Rational>]) -> Vec<DeviationChange> {
    let mut out = Vec::new();
    for (t, (a, b)) in old.iter().zip(new).enumerate() {
        for (e, (x, y)) in a.iter().zip(b).enumerate() {
            if x != y {
                out.push(DeviationChange {
                    period: t,
                    edge: e,
                    from: x.clone(),
                    to: y.clone(),
                });
            }
        }
    }
    out
}

/// Alternates seeker and hider until the loss moves by less than `epsilon`
/// (after at least two seeker steps) or `max_iter` seeker steps.
pub fn play_hsl(
    inst: &NetworkInstance,
    eta_d: Rational,
    epsilon: Rational,
    max_iter: usize,
) -> Result<SolveReport> {
    let opts = SolveOptions {
        epsilon: Some(epsilon),
        max_iter,
        eta_d,
        ..SolveOptions::default()
    };
    play_hsl_with(inst, &opts)
}

pub fn play_hsl_with(inst: &NetworkInstance, opts: &SolveOptions) -> Result<SolveReport> {
    let start = Instant::now();
    let deadline = opts.deadline(start);
    let eps = opts.epsilon_for(Method::Hsl)?;
    if opts.max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
    }
    let mut state = GameState::new(inst, opts.eta_d.clone())?;
    let mut trace = Vec::new();
    let mut pending = Vec::new();
    let mut converged = false;
    loop {
        check_deadline(deadline)?;
        let placement = seeker_with(&state, inst, opts, deadline)?;
        let loss = placement.objective.clone();
        state.k += 1;
        let prev = state.loss_history.last().cloned();
        let (lb, ub) = match &prev {
            Some(p) if *p < loss => (p.clone(), loss.clone()),
            Some(p) => (loss.clone(), p.clone()),
            None => (loss.clone(), loss.clone()),
        };
        let mut row = trace_row(state.k, &loss, &lb, &ub, &placement.selected);
        row.changes = std::mem::take(&mut pending);
        trace.push(row);
        state.loss_history.push(loss.clone());
        state.placement = Some(placement);
        if prev.is_some_and(|p| (&loss - p).abs() < eps) {
            converged = true;
            break;
        }
        if state.k >= opts.max_iter {
            break;
        }
        let sens = sensitivities_with(&state, inst, opts, deadline)?;
        let next = hider_step(&state, inst, &sens);
        pending = changes(&state.deviations, &next.deviations);
        state = next;
        state.k -= 1;
    }
    let last = trace.last().expect("one seeker step");
    let (lower, upper) = (last.lower_bound.clone(), last.upper_bound.clone());
    let placement = state.placement.expect("set by the seeker");
    Ok(SolveReport {
        method: Method::Hsl,
        objective: placement.objective.clone(),
        iterations: state.k,
        gap: &upper - &lower,
        lower_bound: lower,
        upper_bound: upper,
        scenarios_or_cuts: 0,
        converged,
        wall_time: start.elapsed(),
        trace,
        deviations: Some(state.deviations),
        placement,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{EdgeData, NodeData};
    use crate::rational::{int, ratio};

    fn line(gamma_e: usize, gamma_v: usize) -> NetworkInstance {
        // 0–1–2–3 with lengths 4 and d_max 8: M links nodes within two hops
        // unless deviations push a pair over.
        NetworkInstance::new(
            (0..4)
                .map(|id| NodeData {
                    id,
                    nominal_cost: int(10),
                    max_deviation: int(id as i64 + 1),
                })
                .collect(),
            (0..3)
                .map(|i| EdgeData {
                    u: i,
                    v: i + 1,
                    nominal_length: int(4),
                    max_deviation: int(2),
                    period_caps: vec![int(0), int(1)],
                })
                .collect(),
            int(8),
            gamma_e,
            gamma_v,
            2,
            0,
        )
        .unwrap()
    }

    #[test]
    fn hider_update_arithmetic() {
        assert_eq!(
            hider_update(&ratio(3, 2), &ratio(15, 100), &ratio(8, 10), &int(2)),
            ratio(162, 100)
        );
        assert_eq!(
            hider_update(&ratio(6, 5), &ratio(15, 100), &ratio(1, 2), &int(2)),
            ratio(1275, 1000)
        );
        assert_eq!(hider_update(&int(2), &int(1), &int(5), &int(2)), int(2));
        assert_eq!(hider_update(&int(1), &int(1), &int(-5), &int(2)), int(0));
    }

    #[test]
    fn no_edge_budget_is_static() {
        let inst = line(0, 1);
        let r = play_hsl(&inst, ratio(1, 10), ratio(1, 1_000_000), 10).unwrap();
        assert!(r.iterations <= 2);
        assert!(r.converged);
    }

    #[test]
    fn zero_rate_is_stationary() {
        let inst = line(1, 1);
        let r = play_hsl(&inst, int(0), ratio(1, 1_000_000), 10).unwrap();
        assert_eq!(r.iterations, 2);
        assert_eq!(r.trace[0].value, r.trace[1].value);
        assert_eq!(r.deviations.unwrap(), inst.deviation_table());
    }

    #[test]
    fn saturated_deviation_has_no_sensitivity() {
        let inst = line(1, 1);
        let mut state = GameState::new(&inst, ratio(1, 10)).unwrap();
        state.deviations[1][0] = int(2);
        assert_eq!(estimate_sensitivity(&state, &inst, 0, 1).unwrap(), int(0));
    }

    #[test]
    fn deviations_stay_in_range() {
        let inst = line(2, 1);
        let r = play_hsl(&inst, int(5), ratio(1, 1_000_000), 6).unwrap();
        for row in r.deviations.unwrap() {
            for (d, e) in row.iter().zip(inst.edges()) {
                assert!(*d >= int(0) && *d <= e.max_deviation);
            }
        }
    }

    #[test]
    fn raising_a_middle_edge_costs_the_seeker() {
        // Attacking the middle edge breaks the 0–2 and 1–3 links, which
        // forces a second regenerator.
        let inst = line(1, 0);
        let state = GameState::new(&inst, ratio(1, 10)).unwrap();
        let first = seeker_step(&state, &inst).unwrap();
        assert_eq!(first.objective, int(20));
        let s = sensitivities(&state, &inst).unwrap();
        assert!(s[0].iter().all(|v| *v >= int(0)));
    }
}
