//! Budgeted adversaries.
//!
//! On the node side the adversary raises the cost of at most `Γ_v` selected
//! nodes by their deviation. Its linear relaxation is a fractional knapsack
//! with unit items and has an integral optimum: attack the `Γ_v` largest
//! deviations. The dual certificate `(π, λ)` of that LP is produced alongside.

use num_traits::Zero;

use crate::paths::{certificates, TransformedGraph};
use crate::rational::Rational;
use crate::{NetworkInstance, NodeSet, Result, Scenario};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorstCaseCost {
    pub total: Rational,
    /// Attacked nodes, ascending.
    pub attacked_nodes: Vec<usize>,
    pub nominal_part: Rational,
    pub deviation_part: Rational,
}

/// Selected nodes ranked by deviation, largest first, ties by lowest id.
fn ranked_by_deviation(placement: &NodeSet, inst: &NetworkInstance) -> Vec<usize> {
    let mut ids = placement.ids();
    ids.sort_by(|&a, &b| {
        inst.nodes()[b]
            .max_deviation
            .cmp(&inst.nodes()[a].max_deviation)
            .then(a.cmp(&b))
    });
    ids
}

pub fn worst_case_node_cost(placement: &NodeSet, inst: &NetworkInstance) -> WorstCaseCost {
    let mut attacked: Vec<usize> = ranked_by_deviation(placement, inst)
        .into_iter()
        .take(inst.gamma_v())
        .collect();
    attacked.sort_unstable();
    let nominal_part = inst.nominal_cost(placement);
    let deviation_part = attacked.iter().fold(Rational::zero(), |acc, &v| {
        acc + &inst.nodes()[v].max_deviation
    });
    WorstCaseCost {
        total: &nominal_part + &deviation_part,
        attacked_nodes: attacked,
        nominal_part,
        deviation_part,
    }
}

/// Dual solution of the node adversary LP: `π` is the `(Γ_v+1)`-th largest
/// selected deviation (0 if there are fewer), `λ_v = max(0, d_v − π)` on the
/// placement. `Γ_v·π + Σλ` equals the worst-case deviation part.
pub fn dual_certificate(placement: &NodeSet, inst: &NetworkInstance) -> (Rational, Vec<Rational>) {
    let ranked = ranked_by_deviation(placement, inst);
    let pi = ranked
        .get(inst.gamma_v())
        .map_or_else(Rational::zero, |&v| inst.nodes()[v].max_deviation.clone());
    let lambda = (0..inst.n())
        .map(|v| {
            let d = &inst.nodes()[v].max_deviation;
            if placement.contains(v) && *d > pi {
                d - &pi
            } else {
                Rational::zero()
            }
        })
        .collect();
    (pi, lambda)
}

pub fn dual_value(pi: &Rational, lambda: &[Rational], gamma_v: usize) -> Rational {
    lambda
        .iter()
        .fold(pi * Rational::from_integer(gamma_v.into()), |acc, l| {
            acc + l
        })
}

/// Worst-case scenario for `placement` on the instance's own period
/// deviations.
pub fn worst_case_scenario(
    placement: &NodeSet,
    inst: &NetworkInstance,
    m: &TransformedGraph,
) -> Result<Scenario> {
    worst_case_scenario_with(placement, inst, m, &inst.deviation_table())
}

/// Worst-case scenario under an explicit `[t][e]` deviation table.
///
/// Node side: the attack set of [`worst_case_node_cost`]. Edge side, per
/// period: among the links of `m` incident to the placement, the one whose
/// robust distance is closest to `d_max` (ties by lowest pair); the attack is
/// the `Γ_e` largest deviations on its certification path. Deviation levels
/// are the instance's period caps of the attacked edges.
pub fn worst_case_scenario_with(
    placement: &NodeSet,
    inst: &NetworkInstance,
    m: &TransformedGraph,
    table: &[Vec<Rational>],
) -> Result<Scenario> {
    let node_attacks = worst_case_node_cost(placement, inst).attacked_nodes;
    let mut scenario = Scenario::nodes_only(node_attacks, inst.horizon());
    if inst.gamma_e() == 0 {
        return Ok(scenario);
    }
    let links: Vec<(usize, usize)> = m
        .edges()
        .into_iter()
        .filter(|&(p, q)| placement.contains(p) || placement.contains(q))
        .collect();
    for (t, row) in table.iter().enumerate().take(inst.horizon()) {
        let certs = certificates(inst, row, inst.gamma_e(), &links)?;
        let mut tightest: Option<&crate::paths::Certificate> = None;
        for cert in &certs {
            if tightest.is_none_or(|best| cert.value > best.value) {
                tightest = Some(cert);
            }
        }
        if let Some(cert) = tightest {
            scenario.edge_attacks[t] = cert.attacked.clone();
            scenario.deviation_levels[t] = cert
                .attacked
                .iter()
                .map(|&e| inst.edges()[e].period_caps[t].clone())
                .collect();
        }
    }
    Ok(scenario)
}
