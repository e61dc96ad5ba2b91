//! End-to-end solution pipelines.
//!
//! DWC, RSB and RDB build one transformed graph and solve a single placement
//! problem on it. CCG and Benders decompose the RDB problem (scenario pool,
//! connectivity cuts); IRO alternates graph rebuilds and placement solves.
//! The learning game lives in [`crate::hsl`].

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_traits::{Signed, Zero};

use crate::adversary::{worst_case_node_cost, worst_case_scenario, worst_case_scenario_with};
use crate::cds::{
    preprocess, solve_with, verify_placement, Feasibility, Placement, PlacementCost, ScaledNodes,
    SeparatorCut, Verdict,
};
use crate::paths::{build_transformed_graph, worst_period_graph, Regime, TransformedGraph};
use crate::rational::ratio;
use crate::{Error, NetworkInstance, NodeSet, Rational, Result};

/// Iteration cap used when none is given.
pub const DEFAULT_MAX_ITER: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Dwc,
    Rsb,
    Rdb,
    Ccg,
    Bdc,
    Iro,
    Hsl,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Dwc,
        Method::Rsb,
        Method::Rdb,
        Method::Ccg,
        Method::Bdc,
        Method::Iro,
        Method::Hsl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Dwc => "DWC",
            Method::Rsb => "RSB",
            Method::Rdb => "RDB",
            Method::Ccg => "CCG",
            Method::Bdc => "BDC",
            Method::Iro => "IRO",
            Method::Hsl => "HSL",
        }
    }

    /// Tolerance used when the caller gives none: exact for the
    /// decompositions, `1e-6` for the iterative methods.
    pub fn default_epsilon(self) -> Rational {
        match self {
            Method::Iro | Method::Hsl => ratio(1, 1_000_000),
            _ => Rational::zero(),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method {s:?}")))
    }
}

/// A deviation the hider changed before this iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviationChange {
    pub period: usize,
    pub edge: usize,
    pub from: Rational,
    pub to: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRow {
    pub iteration: usize,
    /// Objective of this iteration's placement (master value, loss, ...).
    pub value: Rational,
    pub lower_bound: Rational,
    pub upper_bound: Rational,
    pub placement: NodeSet,
    pub placement_hash: u64,
    pub changes: Vec<DeviationChange>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveReport {
    pub method: Method,
    pub placement: Placement,
    pub objective: Rational,
    pub iterations: usize,
    pub lower_bound: Rational,
    pub upper_bound: Rational,
    pub gap: Rational,
    /// Scenario pool size (CCG), cut count (BDC), 0 otherwise.
    pub scenarios_or_cuts: usize,
    pub converged: bool,
    pub wall_time: Duration,
    pub trace: Vec<TraceRow>,
    /// Final `[t][e]` deviations of the iterative methods.
    pub deviations: Option<Vec<Vec<Rational>>>,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// `None` picks [`Method::default_epsilon`].
    pub epsilon: Option<Rational>,
    pub time_limit: Option<Duration>,
    pub max_iter: usize,
    pub eta_d: Rational,
    /// On a complete `M`, return the empty placement at cost 0.
    pub complete_shortcut: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            epsilon: None,
            time_limit: None,
            max_iter: DEFAULT_MAX_ITER,
            eta_d: ratio(1, 10),
            complete_shortcut: false,
        }
    }
}

impl SolveOptions {
    pub(crate) fn epsilon_for(&self, method: Method) -> Result<Rational> {
        let eps = self
            .epsilon
            .clone()
            .unwrap_or_else(|| method.default_epsilon());
        if eps.is_negative() {
            return Err(Error::InvalidArgument("epsilon must be nonnegative".into()));
        }
        Ok(eps)
    }

    pub(crate) fn deadline(&self, start: Instant) -> Option<Instant> {
        self.time_limit.map(|limit| start + limit)
    }
}

pub(crate) fn check_deadline(deadline: Option<Instant>) -> Result<()> {
    match deadline {
        Some(d) if Instant::now() >= d => Err(Error::Timeout),
        _ => Ok(()),
    }
}

/// Runs `method` on `inst`.
pub fn solve(inst: &NetworkInstance, method: Method, opts: &SolveOptions) -> Result<SolveReport> {
    match method {
        Method::Dwc => solve_dwc(inst, opts),
        Method::Rsb => solve_rsb(inst, opts),
        Method::Rdb => solve_rdb(inst, opts),
        Method::Ccg => solve_ccg(inst, opts),
        Method::Bdc => solve_benders(inst, opts),
        Method::Iro => solve_iro(inst, opts),
        Method::Hsl => crate::hsl::play_hsl_with(inst, opts),
    }
}

/// Exact placement on `m`, or the empty placement when the shortcut applies.
pub(crate) fn place(
    m: &TransformedGraph,
    cost: &dyn PlacementCost,
    opts: &SolveOptions,
    deadline: Option<Instant>,
) -> Result<Placement> {
    if opts.complete_shortcut && m.is_complete() {
        return Ok(Placement {
            selected: NodeSet::empty(m.n()),
            objective: Rational::zero(),
        });
    }
    solve_with(
        m,
        cost,
        &preprocess(m),
        Feasibility::ConnectedDominating,
        deadline,
    )
}

pub(crate) fn trace_row(
    iteration: usize,
    value: &Rational,
    lb: &Rational,
    ub: &Rational,
    placement: &NodeSet,
) -> TraceRow {
    TraceRow {
        iteration,
        value: value.clone(),
        lower_bound: lb.clone(),
        upper_bound: ub.clone(),
        placement: placement.clone(),
        placement_hash: placement.fingerprint(),
        changes: Vec::new(),
    }
}

fn single_shot(
    inst: &NetworkInstance,
    method: Method,
    regime: Regime,
    opts: &SolveOptions,
    cost: impl Fn(&ScaledNodes) -> Box<dyn PlacementCost>,
) -> Result<SolveReport> {
    let start = Instant::now();
    let m = build_transformed_graph(inst, regime)?;
    let nodes = ScaledNodes::new(inst)?;
    let placement = place(&m, cost(&nodes).as_ref(), opts, opts.deadline(start))?;
    let objective = placement.objective.clone();
    let trace = vec![trace_row(
        1,
        &objective,
        &objective,
        &objective,
        &placement.selected,
    )];
    Ok(SolveReport {
        method,
        objective: objective.clone(),
        iterations: 1,
        lower_bound: objective.clone(),
        upper_bound: objective,
        gap: Rational::zero(),
        scenarios_or_cuts: 0,
        converged: true,
        wall_time: start.elapsed(),
        trace,
        deviations: None,
        placement,
    })
}

/// Every edge at nominal plus full deviation, every node at nominal plus
/// full deviation.
pub fn solve_dwc(inst: &NetworkInstance, opts: &SolveOptions) -> Result<SolveReport> {
    single_shot(inst, Method::Dwc, Regime::Dwc, opts, |nodes| {
        Box::new(nodes.upper())
    })
}

/// Static budgets on edge lengths (`Γ_e`) and node costs (`Γ_v`).
pub fn solve_rsb(inst: &NetworkInstance, opts: &SolveOptions) -> Result<SolveReport> {
    let gamma_v = inst.gamma_v();
    single_shot(inst, Method::Rsb, Regime::Rsb, opts, move |nodes| {
        Box::new(nodes.budgeted(gamma_v))
    })
}

/// Per-period edge budgets against the period caps, worst period; static
/// node budget.
pub fn solve_rdb(inst: &NetworkInstance, opts: &SolveOptions) -> Result<SolveReport> {
    let gamma_v = inst.gamma_v();
    single_shot(inst, Method::Rdb, Regime::Rdb, opts, move |nodes| {
        Box::new(nodes.budgeted(gamma_v))
    })
}

/// Column-and-constraint generation on the RDB graph.
///
/// The master minimises the worst cost over a pool of node-attack sets (an
/// empty pool means nominal cost); the subproblem finds the worst attack on
/// the master placement. The reported placement is the one with the lowest
/// subproblem value.
pub fn solve_ccg(inst: &NetworkInstance, opts: &SolveOptions) -> Result<SolveReport> {
    let start = Instant::now();
    let deadline = opts.deadline(start);
    let eps = opts.epsilon_for(Method::Ccg)?;
    let m = build_transformed_graph(inst, Regime::Rdb)?;
    let nodes = ScaledNodes::new(inst)?;
    let n = inst.n();
    let mut pool: Vec<NodeSet> = Vec::new();
    let mut best: Option<Placement> = None;
    let mut lower = Rational::zero();
    let mut trace = Vec::new();
    loop {
        check_deadline(deadline)?;
        let master = place(&m, &nodes.pool(pool.clone()), opts, deadline)?;
        if master.objective > lower {
            lower = master.objective.clone();
        }
        let scenario = worst_case_scenario(&master.selected, inst, &m)?;
        let sp_value = worst_case_node_cost(&master.selected, inst).total;
        if best.as_ref().is_none_or(|b| sp_value < b.objective) {
            best = Some(Placement {
                selected: master.selected.clone(),
                objective: sp_value.clone(),
            });
        }
        let upper = best.as_ref().expect("set above").objective.clone();
        trace.push(trace_row(
            trace.len() + 1,
            &master.objective,
            &lower,
            &upper,
            &master.selected,
        ));
        if sp_value <= &master.objective + &eps {
            break;
        }
        let attack = NodeSet::from_ids(n, scenario.node_attacks);
        if pool.contains(&attack) {
            return Err(Error::Internal(
                "adversary repeated a pooled scenario".into(),
            ));
        }
        pool.push(attack);
    }
    let placement = best.expect("at least one iteration");
    let upper = placement.objective.clone();
    Ok(SolveReport {
        method: Method::Ccg,
        objective: upper.clone(),
        iterations: trace.len(),
        gap: &upper - &lower,
        lower_bound: lower,
        upper_bound: upper,
        scenarios_or_cuts: pool.len(),
        converged: true,
        wall_time: start.elapsed(),
        trace,
        deviations: None,
        placement,
    })
}

/// Connectivity cuts violated by a disconnected selection: one per
/// component of the selected subgraph.
fn separator_cuts(m: &TransformedGraph, selected: &NodeSet) -> Vec<SeparatorCut> {
    let mut components: Vec<NodeSet> = Vec::new();
    let mut seen = NodeSet::empty(m.n());
    for v in selected.iter() {
        if !seen.contains(v) {
            let c = m.component_of(v, selected);
            seen.union_with(&c);
            components.push(c);
        }
    }
    let mut cuts = Vec::new();
    for (i, c) in components.iter().enumerate() {
        let mut boundary = NodeSet::empty(m.n());
        for v in c.iter() {
            boundary.union_with(m.neighbors(v));
        }
        boundary.difference_with(c);
        let other = &components[if i == 0 { 1 } else { 0 }];
        let a = c.iter().next().expect("nonempty component");
        let b = other.iter().next().expect("nonempty component");
        cuts.push(SeparatorCut {
            a: a.min(b),
            b: a.max(b),
            separator: boundary,
        });
    }
    cuts
}

/// Benders-style decomposition on the RDB graph.
///
/// The master only asks for domination plus the connectivity cuts found so
/// far; the subproblem checks that the master's selection is connected and,
/// if not, returns cuts `x_a + x_b − 1 ≤ Σ_{v∈N(C)} x_v` for each component
/// `C`. There is no cost term in the subproblem, so the objective is the same
/// as the monolithic RDB solve.
pub fn solve_benders(inst: &NetworkInstance, opts: &SolveOptions) -> Result<SolveReport> {
    let start = Instant::now();
    let deadline = opts.deadline(start);
    let eps = opts.epsilon_for(Method::Bdc)?;
    let m = build_transformed_graph(inst, Regime::Rdb)?;
    let nodes = ScaledNodes::new(inst)?;
    let cost = nodes.budgeted(inst.gamma_v());
    let n = inst.n();
    let cap = if n >= 63 { usize::MAX } else { 1usize << n };
    let warm = preprocess(&m);
    let mut cuts: Vec<SeparatorCut> = Vec::new();
    let mut trace = Vec::new();
    let shortcut = opts.complete_shortcut && m.is_complete();
    let placement = loop {
        check_deadline(deadline)?;
        let master = if shortcut {
            place(&m, &cost, opts, deadline)?
        } else {
            solve_with(
                &m,
                &cost,
                &warm,
                Feasibility::DominatingWithCuts(&cuts),
                deadline,
            )?
        };
        let verdict = if shortcut {
            Verdict::Feasible
        } else {
            verify_placement(&m, &master.selected, None)
        };
        let upper = if verdict.is_feasible() {
            master.objective.clone()
        } else {
            cost.cost(&NodeSet::full(n))
        };
        trace.push(trace_row(
            trace.len() + 1,
            &master.objective,
            &master.objective,
            &upper,
            &master.selected,
        ));
        match verdict {
            Verdict::Feasible => break master,
            Verdict::Undominated(v) => {
                return Err(Error::Internal(format!("master left node {v} undominated")));
            }
            Verdict::Disconnected(..) => {
                for cut in separator_cuts(&m, &master.selected) {
                    if !cuts.contains(&cut) {
                        cuts.push(cut);
                    }
                }
                if cuts.len() > cap {
                    return Err(Error::NonConvergence(
                        "Benders cut pool exceeded its cap".into(),
                    ));
                }
            }
        }
    };
    let objective = placement.objective.clone();
    debug_assert!(eps >= Rational::zero());
    Ok(SolveReport {
        method: Method::Bdc,
        objective: objective.clone(),
        iterations: trace.len(),
        lower_bound: objective.clone(),
        upper_bound: objective,
        gap: Rational::zero(),
        scenarios_or_cuts: cuts.len(),
        converged: true,
        wall_time: start.elapsed(),
        trace,
        deviations: None,
        placement,
    })
}

/// `|new − old| / old ≤ eps`, or `|new − old| ≤ eps` when `old` is zero.
pub(crate) fn stabilised(old: &Rational, new: &Rational, eps: &Rational) -> bool {
    let delta = (new - old).abs();
    if old.is_zero() {
        delta <= *eps
    } else {
        delta / old.abs() <= *eps
    }
}

/// Iterative robust optimisation.
///
/// Starts from the period caps. Each round builds `M` from the current
/// deviation table, solves the placement exactly and lets the adversary
/// attack it; the edges it attacks move to their full deviation for the next
/// round. Stops once the objective stabilises, after `max_iter` rounds, or
/// when a rebuilt graph disconnects (keeping the previous round).
pub fn solve_iro(inst: &NetworkInstance, opts: &SolveOptions) -> Result<SolveReport> {
    let start = Instant::now();
    let deadline = opts.deadline(start);
    let eps = opts.epsilon_for(Method::Iro)?;
    if opts.max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
    }
    let nodes = ScaledNodes::new(inst)?;
    let cost = nodes.budgeted(inst.gamma_v());
    let mut table = inst.deviation_table();
    let mut trace: Vec<TraceRow> = Vec::new();
    let mut last: Option<(Placement, Vec<Vec<Rational>>)> = None;
    let mut converged = false;
    for k in 1..=opts.max_iter {
        check_deadline(deadline)?;
        let m = worst_period_graph(inst, &table, inst.gamma_e())?;
        if !m.is_connected() {
            if last.is_none() {
                return Err(Error::InfeasibleInstance(
                    "RDB communication graph is disconnected".into(),
                ));
            }
            log::debug!("IRO stopped at round {k}: graph disconnected");
            break;
        }
        let placement = place(&m, &cost, opts, deadline)?;
        let z = placement.objective.clone();
        let prev = last.as_ref().map(|(p, _)| p.objective.clone());
        let lb = prev.clone().unwrap_or_else(|| z.clone());
        let mut row = trace_row(k, &z, &lb, &z, &placement.selected);
        let scenario = worst_case_scenario_with(&placement.selected, inst, &m, &table)?;
        let mut next = table.clone();
        for (t, attacked) in scenario.edge_attacks.iter().enumerate() {
            for &e in attacked {
                let full = &inst.edges()[e].max_deviation;
                if next[t][e] != *full {
                    row.changes.push(DeviationChange {
                        period: t,
                        edge: e,
                        from: next[t][e].clone(),
                        to: full.clone(),
                    });
                    next[t][e] = full.clone();
                }
            }
        }
        trace.push(row);
        let done = prev.as_ref().is_some_and(|p| stabilised(p, &z, &eps));
        last = Some((placement, table));
        if done {
            converged = true;
            break;
        }
        table = next;
    }
    let (placement, table) = last.expect("at least one round");
    let objective = placement.objective.clone();
    let lower = if trace.len() >= 2 {
        trace[trace.len() - 2].value.clone()
    } else {
        objective.clone()
    };
    let (lower, upper) = if lower <= objective {
        (lower, objective.clone())
    } else {
        (objective.clone(), lower)
    };
    Ok(SolveReport {
        method: Method::Iro,
        objective,
        iterations: trace.len(),
        gap: &upper - &lower,
        lower_bound: lower,
        upper_bound: upper,
        scenarios_or_cuts: 0,
        converged,
        wall_time: start.elapsed(),
        trace,
        deviations: Some(table),
        placement,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{EdgeData, NodeData};
    use crate::rational::int;

    /// Path 0–1–2 with a tight `d_max`, so `M` is the path in every regime.
    fn path3(gamma_e: usize, gamma_v: usize) -> NetworkInstance {
        NetworkInstance::new(
            (0..3)
                .map(|id| NodeData {
                    id,
                    nominal_cost: int(5),
                    max_deviation: int([2, 9, 2][id]),
                })
                .collect(),
            vec![
                EdgeData {
                    u: 0,
                    v: 1,
                    nominal_length: int(2),
                    max_deviation: int(1),
                    period_caps: vec![int(1), int(0), int(1)],
                },
                EdgeData {
                    u: 1,
                    v: 2,
                    nominal_length: int(2),
                    max_deviation: int(1),
                    period_caps: vec![int(0), int(1), int(1)],
                },
            ],
            int(3),
            gamma_e,
            gamma_v,
            3,
            0,
        )
        .unwrap()
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().to_lowercase().parse::<Method>().unwrap(), m);
        }
        assert!("xyz".parse::<Method>().is_err());
    }

    #[test]
    fn path_pipelines_agree() {
        let inst = path3(1, 1);
        let opts = SolveOptions::default();
        let dwc = solve_dwc(&inst, &opts).unwrap();
        assert_eq!(dwc.placement.selected.ids(), vec![1]);
        assert_eq!(dwc.objective, int(14));
        for method in [
            Method::Rsb,
            Method::Rdb,
            Method::Ccg,
            Method::Bdc,
            Method::Iro,
        ] {
            let r = solve(&inst, method, &opts).unwrap();
            assert_eq!(r.objective, int(14), "{method}");
            assert!(r.lower_bound <= r.objective && r.objective <= r.upper_bound);
        }
        let ccg = solve_ccg(&inst, &opts).unwrap();
        assert!(ccg.iterations <= 2);
    }

    #[test]
    fn zero_node_budget_needs_one_ccg_round() {
        let inst = path3(1, 0);
        let r = solve_ccg(&inst, &SolveOptions::default()).unwrap();
        assert_eq!(r.iterations, 1);
        assert_eq!(r.objective, int(5));
        assert_eq!(r.scenarios_or_cuts, 0);
    }

    #[test]
    fn zero_edge_budget_iro_is_a_fixed_point() {
        let inst = path3(0, 1);
        let r = solve_iro(&inst, &SolveOptions::default()).unwrap();
        assert_eq!(r.iterations, 2);
        assert!(r.converged);
    }

    #[test]
    fn complete_shortcut_is_free() {
        let inst = path3(0, 0).with_budgets(0, 0);
        let mut opts = SolveOptions::default();
        let wide = NetworkInstance::new(
            inst.nodes().to_vec(),
            inst.edges().to_vec(),
            int(100),
            0,
            0,
            3,
            0,
        )
        .unwrap();
        let plain = solve_rsb(&wide, &opts).unwrap();
        assert_eq!(plain.placement.selected.len(), 1);
        opts.complete_shortcut = true;
        let short = solve_rsb(&wide, &opts).unwrap();
        assert!(short.placement.selected.is_empty());
        assert_eq!(short.objective, int(0));
    }

    #[test]
    fn negative_epsilon_rejected() {
        let opts = SolveOptions {
            epsilon: Some(int(-1)),
            ..SolveOptions::default()
        };
        assert!(matches!(
            solve_ccg(&path3(1, 1), &opts),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn stabilised_switches_to_absolute() {
        assert!(stabilised(&int(0), &ratio(1, 10), &ratio(1, 5)));
        assert!(!stabilised(&int(0), &int(1), &ratio(1, 5)));
        assert!(stabilised(&int(10), &int(11), &ratio(1, 10)));
        assert!(!stabilised(&int(10), &int(12), &ratio(1, 10)));
    }
}
