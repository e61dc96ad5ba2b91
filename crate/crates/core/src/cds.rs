//! Placement on the transformed graph.
//!
//! A placement is feasible when every unselected node has a selected
//! neighbour and the selected nodes induce a connected subgraph of `M`, i.e.
//! it is a connected dominating set. [`solve_rlp_exact`] finds a cheapest one
//! for any monotone cost by depth-first branch and bound; [`brute_force_rlp`]
//! enumerates every subset and serves as its oracle.

use std::cmp::Ordering;
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::One;

use crate::nodeset::search_order;
use crate::paths::TransformedGraph;
use crate::rational::{common_denominator, scale_to_i128, unscale, Rational};
use crate::{Error, NetworkInstance, NodeSet, Result};

/// Largest graph [`brute_force_rlp`] accepts.
pub const BRUTE_FORCE_MAX_NODES: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    pub selected: NodeSet,
    pub objective: Rational,
}

/// Nodes forced into every feasible placement: unique neighbours of
/// degree-one nodes of `M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WarmStart {
    pub mandatory: NodeSet,
}

impl WarmStart {
    pub fn none(n: usize) -> Self {
        WarmStart {
            mandatory: NodeSet::empty(n),
        }
    }
}

/// Graphs with fewer than three nodes get an empty warm start: on a single
/// edge either endpoint alone is feasible.
pub fn preprocess(m: &TransformedGraph) -> WarmStart {
    let n = m.n();
    let mut mandatory = NodeSet::empty(n);
    if n >= 3 {
        for v in 0..n {
            if m.degree(v) == 1 {
                let u = m.neighbors(v).iter().next().expect("degree one");
                mandatory.insert(u);
            }
        }
    }
    WarmStart { mandatory }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Feasible,
    /// An unselected node without a selected neighbour.
    Undominated(usize),
    /// Two selected nodes not joined inside the selected subgraph.
    Disconnected(usize, usize),
}

impl Verdict {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Verdict::Feasible)
    }
}

/// Checks domination of every node and connectivity of the selected
/// subgraph. With `pairs`, only the listed pairs (both endpoints selected)
/// must be connected.
pub fn verify_placement(
    m: &TransformedGraph,
    placement: &NodeSet,
    pairs: Option<&[(usize, usize)]>,
) -> Verdict {
    let n = m.n();
    for v in 0..n {
        if !placement.contains(v) && !m.neighbors(v).intersects(placement) {
            return Verdict::Undominated(v);
        }
    }
    match pairs {
        Some(pairs) => {
            for &(p, q) in pairs {
                if placement.contains(p)
                    && placement.contains(q)
                    && !m.component_of(p, placement).contains(q)
                {
                    return Verdict::Disconnected(p, q);
                }
            }
        }
        None => {
            if let Some(first) = placement.iter().next() {
                let reach = m.component_of(first, placement);
                if let Some(other) = placement.iter().find(|&v| !reach.contains(v)) {
                    return Verdict::Disconnected(first, other);
                }
            }
        }
    }
    Verdict::Feasible
}

// ---------------------------------------------------------------------------
// Costs

/// A monotone placement cost, evaluated exactly as an integer multiple of
/// `1 / unit()`.
pub trait PlacementCost {
    fn unit(&self) -> &BigInt;

    fn scaled_cost(&self, selected: &NodeSet) -> i128;

    /// Lower bound on `scaled_cost(S ∪ {v}) − scaled_cost(S)` for any `S`
    /// without `v`.
    fn scaled_increment(&self, v: usize) -> i128;

    fn cost(&self, selected: &NodeSet) -> Rational {
        unscale(self.scaled_cost(selected), self.unit())
    }
}

/// Node costs and deviations of an instance on a common integer scale.
#[derive(Debug, Clone)]
pub struct ScaledNodes {
    unit: BigInt,
    nominal: Vec<i128>,
    deviation: Vec<i128>,
}

impl ScaledNodes {
    pub fn new(inst: &NetworkInstance) -> Result<Self> {
        let nominal: Vec<Rational> = inst
            .nodes()
            .iter()
            .map(|v| v.nominal_cost.clone())
            .collect();
        let deviation: Vec<Rational> = inst
            .nodes()
            .iter()
            .map(|v| v.max_deviation.clone())
            .collect();
        Self::from_values(&nominal, &deviation)
    }

    pub fn from_values(nominal: &[Rational], deviation: &[Rational]) -> Result<Self> {
        if nominal.len() != deviation.len() {
            return Err(Error::InvalidArgument(
                "cost and deviation counts differ".into(),
            ));
        }
        let n = nominal.len() as i128;
        let unit = common_denominator(nominal.iter().chain(deviation));
        let scale = |r: &Rational| {
            scale_to_i128(r, &unit)
                .filter(|v| v.checked_mul(2 * n + 2).is_some())
                .ok_or_else(|| {
                    Error::InvalidArgument("node costs too fine-grained for exact search".into())
                })
        };
        let nominal = nominal.iter().map(scale).collect::<Result<_>>()?;
        let deviation = deviation.iter().map(scale).collect::<Result<_>>()?;
        Ok(ScaledNodes {
            unit,
            nominal,
            deviation,
        })
    }

    /// Nominal cost only.
    pub fn nominal(&self) -> LinearCost {
        LinearCost {
            unit: self.unit.clone(),
            weights: self.nominal.clone(),
        }
    }

    /// Every node at nominal cost plus its full deviation.
    pub fn upper(&self) -> LinearCost {
        LinearCost {
            unit: self.unit.clone(),
            weights: self
                .nominal
                .iter()
                .zip(&self.deviation)
                .map(|(c, d)| c + d)
                .collect(),
        }
    }

    /// Nominal cost plus the `gamma` largest selected deviations.
    pub fn budgeted(&self, gamma: usize) -> BudgetedCost {
        BudgetedCost {
            nodes: self.clone(),
            gamma,
        }
    }

    /// Maximum over a pool of node-attack sets; an empty pool is nominal.
    pub fn pool(&self, attacks: Vec<NodeSet>) -> PoolCost {
        PoolCost {
            nodes: self.clone(),
            attacks,
        }
    }
}

/// Sum of fixed per-node weights.
#[derive(Debug, Clone)]
pub struct LinearCost {
    unit: BigInt,
    weights: Vec<i128>,
}

impl LinearCost {
    pub fn new(weights: &[Rational]) -> Result<Self> {
        let unit = common_denominator(weights);
        let weights = weights
            .iter()
            .map(|w| scale_to_i128(w, &unit))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::InvalidArgument("weights too fine-grained".into()))?;
        Ok(LinearCost { unit, weights })
    }

    pub fn unit_weights(n: usize) -> Self {
        LinearCost {
            unit: BigInt::one(),
            weights: vec![1; n],
        }
    }
}

impl PlacementCost for LinearCost {
    fn unit(&self) -> &BigInt {
        &self.unit
    }
    fn scaled_cost(&self, selected: &NodeSet) -> i128 {
        selected.iter().map(|v| self.weights[v]).sum()
    }
    fn scaled_increment(&self, v: usize) -> i128 {
        self.weights[v]
    }
}

#[derive(Debug, Clone)]
pub struct BudgetedCost {
    nodes: ScaledNodes,
    gamma: usize,
}

impl PlacementCost for BudgetedCost {
    fn unit(&self) -> &BigInt {
        &self.nodes.unit
    }
    fn scaled_cost(&self, selected: &NodeSet) -> i128 {
        let mut devs: Vec<i128> = selected.iter().map(|v| self.nodes.deviation[v]).collect();
        devs.sort_unstable_by(|a, b| b.cmp(a));
        let nominal: i128 = selected.iter().map(|v| self.nodes.nominal[v]).sum();
        nominal + devs.iter().take(self.gamma).sum::<i128>()
    }
    fn scaled_increment(&self, v: usize) -> i128 {
        self.nodes.nominal[v]
    }
}

#[derive(Debug, Clone)]
pub struct PoolCost {
    nodes: ScaledNodes,
    attacks: Vec<NodeSet>,
}

impl PlacementCost for PoolCost {
    fn unit(&self) -> &BigInt {
        &self.nodes.unit
    }
    fn scaled_cost(&self, selected: &NodeSet) -> i128 {
        let nominal: i128 = selected.iter().map(|v| self.nodes.nominal[v]).sum();
        let extra = self
            .attacks
            .iter()
            .map(|z| {
                selected
                    .iter()
                    .filter(|&v| z.contains(v))
                    .map(|v| self.nodes.deviation[v])
                    .sum::<i128>()
            })
            .max()
            .unwrap_or(0);
        nominal + extra
    }
    fn scaled_increment(&self, v: usize) -> i128 {
        self.nodes.nominal[v]
    }
}

// ---------------------------------------------------------------------------
// Exact search

/// `x_a + x_b − 1 ≤ Σ_{v∈separator} x_v`: if both `a` and `b` are selected,
/// some separator node must be too.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparatorCut {
    pub a: usize,
    pub b: usize,
    pub separator: NodeSet,
}

impl SeparatorCut {
    pub fn satisfied_by(&self, selected: &NodeSet) -> bool {
        !(selected.contains(self.a) && selected.contains(self.b))
            || self.separator.intersects(selected)
    }
}

/// What the search treats as a feasible placement.
#[derive(Debug, Clone, Copy)]
pub enum Feasibility<'a> {
    /// Dominating and connected.
    ConnectedDominating,
    /// Dominating and satisfying every cut; connectivity is left to the cuts.
    DominatingWithCuts(&'a [SeparatorCut]),
}

/// Cheapest connected dominating set of `m` containing the warm start. Ties
/// go to the set that contains the lowest id where two optima differ.
pub fn solve_rlp_exact(
    m: &TransformedGraph,
    cost: &dyn PlacementCost,
    warm: &WarmStart,
) -> Result<Placement> {
    solve_with(m, cost, warm, Feasibility::ConnectedDominating, None)
}

/// Depth-first branch and bound over nodes in id order, include branch
/// first. The bound is the cost of the included nodes plus the cheapest
/// increment that some still-undominated node (or violated cut, or split
/// selection) forces.
pub fn solve_with(
    m: &TransformedGraph,
    cost: &dyn PlacementCost,
    warm: &WarmStart,
    feasibility: Feasibility<'_>,
    deadline: Option<Instant>,
) -> Result<Placement> {
    let n = m.n();
    if n == 0 {
        return Err(Error::InvalidArgument("empty graph".into()));
    }
    let closed: Vec<NodeSet> = (0..n)
        .map(|v| {
            let mut s = m.neighbors(v).clone();
            s.insert(v);
            s
        })
        .collect();
    let mut search = Search {
        m,
        cost,
        closed,
        feasibility,
        deadline,
        visited: 0,
        included: warm.mandatory.clone(),
        excluded: NodeSet::empty(n),
        best: None,
    };
    if let Feasibility::ConnectedDominating = feasibility {
        if m.is_connected() {
            let seed = greedy_cds(m, cost, &warm.mandatory);
            let c = cost.scaled_cost(&seed);
            search.best = Some((c, seed));
        }
    }
    search.descend(0)?;
    let (scaled, selected) = search
        .best
        .ok_or_else(|| Error::Internal("no feasible placement exists on this graph".into()))?;
    Ok(Placement {
        objective: unscale(scaled, cost.unit()),
        selected,
    })
}

struct Search<'a> {
    m: &'a TransformedGraph,
    cost: &'a dyn PlacementCost,
    closed: Vec<NodeSet>,
    feasibility: Feasibility<'a>,
    deadline: Option<Instant>,
    visited: u64,
    included: NodeSet,
    excluded: NodeSet,
    best: Option<(i128, NodeSet)>,
}

impl Search<'_> {
    fn descend(&mut self, k: usize) -> Result<()> {
        self.visited += 1;
        if self.visited.is_multiple_of(4096) {
            if let Some(deadline) = self.deadline {
                if Instant::now() >= deadline {
                    return Err(Error::Timeout);
                }
            }
        }
        let Some(bound) = self.bound() else {
            return Ok(());
        };
        if let Some((best, incumbent)) = &self.best {
            if bound > *best || (bound == *best && self.after(k, incumbent)) {
                return Ok(());
            }
        }
        if k == self.m.n() {
            if self.feasible(&self.included) {
                let c = self.cost.scaled_cost(&self.included);
                let better = match &self.best {
                    None => true,
                    Some((best, incumbent)) => {
                        c < *best
                            || (c == *best
                                && search_order(&self.included, incumbent) == Ordering::Less)
                    }
                };
                if better {
                    self.best = Some((c, self.included.clone()));
                }
            }
            return Ok(());
        }
        if self.included.contains(k) {
            return self.descend(k + 1);
        }
        self.included.insert(k);
        let r = self.descend(k + 1);
        self.included.remove(k);
        r?;
        self.excluded.insert(k);
        let r = self.descend(k + 1);
        self.excluded.remove(k);
        r
    }

    /// Every leaf below depth `k` follows `incumbent` in search order.
    fn after(&self, k: usize, incumbent: &NodeSet) -> bool {
        for id in 0..k {
            let mine = self.included.contains(id);
            if mine != incumbent.contains(id) {
                return incumbent.contains(id);
            }
        }
        false
    }

    fn feasible(&self, selected: &NodeSet) -> bool {
        match self.feasibility {
            Feasibility::ConnectedDominating => {
                verify_placement(self.m, selected, None).is_feasible()
            }
            Feasibility::DominatingWithCuts(cuts) => {
                (0..self.m.n()).all(|v| self.closed[v].intersects(selected))
                    && cuts.iter().all(|c| c.satisfied_by(selected))
            }
        }
    }

    /// Lower bound on any leaf of this subtree, or `None` if it has no
    /// feasible leaf.
    fn bound(&self) -> Option<i128> {
        let n = self.m.n();
        let allowed = self.excluded.complement();
        let mut open = allowed.clone();
        open.difference_with(&self.included);
        let cheapest_in = |set: &NodeSet| -> Option<i128> {
            set.iter()
                .filter(|&v| open.contains(v))
                .map(|v| self.cost.scaled_increment(v))
                .min()
        };

        let mut extra: i128 = 0;
        for u in 0..n {
            if self.closed[u].intersects(&self.included) {
                continue;
            }
            extra = extra.max(cheapest_in(&self.closed[u])?);
        }

        match self.feasibility {
            Feasibility::ConnectedDominating => {
                if let Some(first) = self.included.iter().next() {
                    let reach = self.m.component_of(first, &allowed);
                    if !self.included.is_subset(&reach) {
                        return None;
                    }
                    let within = self.m.component_of(first, &self.included);
                    if within.len() != self.included.len() {
                        extra = extra.max(cheapest_in(&open)?);
                    }
                }
            }
            Feasibility::DominatingWithCuts(cuts) => {
                for cut in cuts {
                    if self.included.contains(cut.a)
                        && self.included.contains(cut.b)
                        && !cut.separator.intersects(&self.included)
                    {
                        extra = extra.max(cheapest_in(&cut.separator)?);
                    }
                }
            }
        }
        Some(self.cost.scaled_cost(&self.included) + extra)
    }
}

/// A feasible starting incumbent: greedy domination, then shortest connecting
/// paths, then removal of redundant nodes.
fn greedy_cds(m: &TransformedGraph, cost: &dyn PlacementCost, warm: &NodeSet) -> NodeSet {
    let n = m.n();
    let mut selected = warm.clone();
    let mut dominated = NodeSet::empty(n);
    for v in selected.iter() {
        dominated.insert(v);
        dominated.union_with(m.neighbors(v));
    }
    while dominated.len() < n {
        let mut best: Option<(usize, usize, i128)> = None;
        for v in (0..n).filter(|&v| !selected.contains(v)) {
            let mut gain = m.neighbors(v).clone();
            gain.insert(v);
            gain.difference_with(&dominated);
            let g = gain.len();
            if g == 0 {
                continue;
            }
            let c = cost.scaled_increment(v).max(1);
            // maximise g / c
            let better = best.is_none_or(|(_, bg, bc)| (g as i128) * bc > (bg as i128) * c);
            if better {
                best = Some((v, g, c));
            }
        }
        let (v, _, _) = best.expect("some node dominates something");
        selected.insert(v);
        dominated.insert(v);
        dominated.union_with(m.neighbors(v));
    }
    connect(m, &mut selected);
    let mut order: Vec<usize> = selected.ids();
    order.sort_by_key(|&v| std::cmp::Reverse((cost.scaled_increment(v), v)));
    for v in order {
        if warm.contains(v) {
            continue;
        }
        selected.remove(v);
        if !verify_placement(m, &selected, None).is_feasible() {
            selected.insert(v);
        }
    }
    selected
}

/// Adds interior nodes of shortest paths until `selected` is connected.
fn connect(m: &TransformedGraph, selected: &mut NodeSet) {
    let n = m.n();
    loop {
        let Some(first) = selected.iter().next() else {
            return;
        };
        let reach = m.component_of(first, selected);
        if reach.len() == selected.len() {
            return;
        }
        // BFS from the component over all nodes to the nearest other selected node.
        let mut parent: Vec<Option<usize>> = vec![None; n];
        let mut seen = reach.clone();
        let mut queue: std::collections::VecDeque<usize> = reach.iter().collect();
        let mut hit = None;
        while let Some(v) = queue.pop_front() {
            for w in m.neighbors(v).iter() {
                if seen.contains(w) {
                    continue;
                }
                seen.insert(w);
                parent[w] = Some(v);
                if selected.contains(w) {
                    hit = Some(w);
                    break;
                }
                queue.push_back(w);
            }
            if hit.is_some() {
                break;
            }
        }
        let Some(mut v) = hit else {
            // M itself is disconnected; nothing to add.
            return;
        };
        while let Some(p) = parent[v] {
            if reach.contains(p) {
                break;
            }
            selected.insert(p);
            v = p;
        }
    }
}

/// Exhaustive minimum over all `2^n` subsets (same tie rule as the search).
pub fn brute_force_rlp(m: &TransformedGraph, cost: &dyn PlacementCost) -> Result<Placement> {
    let n = m.n();
    if n > BRUTE_FORCE_MAX_NODES {
        return Err(Error::InvalidArgument(format!(
            "brute force is limited to {BRUTE_FORCE_MAX_NODES} nodes, got {n}"
        )));
    }
    let mut best: Option<(i128, NodeSet)> = None;
    for mask in 0u32..(1u32 << n) {
        let set = NodeSet::from_ids(n, (0..n).filter(|&v| mask >> v & 1 == 1));
        if !verify_placement(m, &set, None).is_feasible() {
            continue;
        }
        let c = cost.scaled_cost(&set);
        let better = match &best {
            None => true,
            Some((bc, bs)) => c < *bc || (c == *bc && search_order(&set, bs) == Ordering::Less),
        };
        if better {
            best = Some((c, set));
        }
    }
    let (c, selected) =
        best.ok_or_else(|| Error::InfeasibleInstance("no connected dominating set".into()))?;
    Ok(Placement {
        objective: unscale(c, cost.unit()),
        selected,
    })
}
