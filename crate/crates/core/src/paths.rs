//! Nominal and budget-robust shortest paths, and the transformed
//! communication graph `M`.
//!
//! The budget-robust distance between `p` and `q` is
//!
//! ```text
//! min over p–q paths P of  Σ_{e∈P} c_e  +  (sum of the γ largest d_e on P)
//! ```
//!
//! It is computed exactly by threshold decomposition: for every threshold
//! `θ ∈ {0} ∪ {d_e}` run a nominal shortest path with lengths
//! `c_e + max(d_e − θ, 0)` and keep the smallest `γ·θ + dist_θ`. All kernels
//! rescale to a common denominator and run on `i128` when the values fit,
//! falling back to big integers otherwise.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;
use std::ops::{Add, Sub};

use num_bigint::BigInt;
use num_traits::Zero;

use crate::rational::{common_denominator, scale_to_i128, Rational};
use crate::{Error, NetworkInstance, NodeSet, Result};

/// How edge lengths are turned into certified distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Every edge at `c_e + d_e`.
    Dwc,
    /// Static budget `Γ_e` over the full deviations `d_e`.
    Rsb,
    /// Static budget `Γ_e` per period over `d_e^t`, worst period.
    Rdb,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Dwc => "DWC",
            Regime::Rsb => "RSB",
            Regime::Rdb => "RDB",
        })
    }
}

/// Symmetric all-pairs distances; `None` marks an unreachable pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RobustDistanceMatrix {
    regime: Option<Regime>,
    dist: Vec<Vec<Option<Rational>>>,
}

impl RobustDistanceMatrix {
    pub fn regime(&self) -> Option<Regime> {
        self.regime
    }

    pub fn n(&self) -> usize {
        self.dist.len()
    }

    pub fn get(&self, p: usize, q: usize) -> Option<&Rational> {
        self.dist[p][q].as_ref()
    }

    pub fn rows(&self) -> &[Vec<Option<Rational>>] {
        &self.dist
    }

    /// Entry-wise maximum; an unreachable entry dominates.
    fn max_with(&mut self, other: &RobustDistanceMatrix) {
        for (row, other_row) in self.dist.iter_mut().zip(&other.dist) {
            for (a, b) in row.iter_mut().zip(other_row) {
                *a = match (a.take(), b) {
                    (Some(x), Some(y)) => Some(if *y > x { y.clone() } else { x }),
                    _ => None,
                };
            }
        }
    }
}

/// The communication graph: `(p, q)` is an edge iff the certified distance
/// between them is at most `d_max`.
#[derive(Clone, PartialEq, Eq)]
pub struct TransformedGraph {
    neighbors: Vec<NodeSet>,
}

impl TransformedGraph {
    /// Builds a graph from an explicit edge list. Self-loops are ignored.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut neighbors = vec![NodeSet::empty(n); n];
        for (p, q) in edges {
            if p != q {
                neighbors[p].insert(q);
                neighbors[q].insert(p);
            }
        }
        TransformedGraph { neighbors }
    }

    pub fn from_distances(matrix: &RobustDistanceMatrix, d_max: &Rational) -> Self {
        let n = matrix.n();
        let edges = (0..n).flat_map(|p| (p + 1..n).map(move |q| (p, q)));
        let edges: Vec<_> = edges
            .filter(|&(p, q)| matrix.get(p, q).is_some_and(|d| d <= d_max))
            .collect();
        TransformedGraph::from_edges(n, edges)
    }

    pub fn n(&self) -> usize {
        self.neighbors.len()
    }

    pub fn adjacent(&self, p: usize, q: usize) -> bool {
        self.neighbors[p].contains(q)
    }

    /// Open neighbourhood of `v`.
    pub fn neighbors(&self, v: usize) -> &NodeSet {
        &self.neighbors[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    /// Edges `(p, q)` with `p < q`, ascending.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n())
            .flat_map(|p| {
                self.neighbors[p]
                    .iter()
                    .filter(move |&q| q > p)
                    .map(move |q| (p, q))
            })
            .collect()
    }

    /// Distinct pairs without an edge (NDC pairs), ascending.
    pub fn ndc_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .filter(|&(p, q)| !self.adjacent(p, q))
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        (0..self.n()).all(|v| self.degree(v) + 1 == self.n())
    }

    pub fn is_connected(&self) -> bool {
        self.n() == 0 || self.component_of(0, &NodeSet::full(self.n())).len() == self.n()
    }

    /// Nodes reachable from `start` inside `allowed` (which must contain it).
    pub fn component_of(&self, start: usize, allowed: &NodeSet) -> NodeSet {
        let mut seen = NodeSet::empty(self.n());
        seen.insert(start);
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for w in self.neighbors[v].iter() {
                if allowed.contains(w) && !seen.contains(w) {
                    seen.insert(w);
                    stack.push(w);
                }
            }
        }
        seen
    }

    /// Edge-wise intersection of graphs on the same node set.
    pub fn intersection<'a>(
        graphs: impl IntoIterator<Item = &'a TransformedGraph>,
    ) -> Option<Self> {
        let mut iter = graphs.into_iter();
        let mut acc = iter.next()?.clone();
        for g in iter {
            for (mine, theirs) in acc.neighbors.iter_mut().zip(&g.neighbors) {
                let mut keep = mine.clone();
                keep.difference_with(&theirs.complement());
                *mine = keep;
            }
        }
        Some(acc)
    }
}

impl fmt::Debug for TransformedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransformedGraph")
            .field("n", &self.n())
            .field("edges", &self.edges())
            .finish()
    }
}

// ---------------------------------------------------------------------------
// Integer kernels

trait Weight: Ord + Clone + Add<Output = Self> + Sub<Output = Self> {
    fn zero() -> Self;
    fn times(&self, k: usize) -> Self;
    fn to_rational(&self, denom: &BigInt) -> Rational;
}

impl Weight for i128 {
    fn zero() -> Self {
        0
    }
    fn times(&self, k: usize) -> Self {
        self * k as i128
    }
    fn to_rational(&self, denom: &BigInt) -> Rational {
        Rational::new(BigInt::from(*self), denom.clone())
    }
}

impl Weight for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn times(&self, k: usize) -> Self {
        self * BigInt::from(k)
    }
    fn to_rational(&self, denom: &BigInt) -> Rational {
        Rational::new(self.clone(), denom.clone())
    }
}

/// Distances and predecessor edges from one source.
struct Tree<W> {
    dist: Vec<Option<W>>,
    pred: Vec<Option<usize>>,
}

fn dijkstra<W: Weight>(inst: &NetworkInstance, lengths: &[W], source: usize) -> Tree<W> {
    let n = inst.n();
    let mut dist: Vec<Option<W>> = vec![None; n];
    let mut pred = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = Some(W::zero());
    heap.push(Reverse((W::zero(), source)));
    while let Some(Reverse((d, v))) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        for &(w, e) in inst.neighbors(v) {
            if done[w] {
                continue;
            }
            let candidate = d.clone() + lengths[e].clone();
            if dist[w].as_ref().is_none_or(|cur| candidate < *cur) {
                dist[w] = Some(candidate.clone());
                pred[w] = Some(e);
                heap.push(Reverse((candidate, w)));
            }
        }
    }
    Tree { dist, pred }
}

fn walk_back(
    inst: &NetworkInstance,
    pred: &[Option<usize>],
    source: usize,
    target: usize,
) -> Vec<usize> {
    let mut path = Vec::new();
    let mut v = target;
    while v != source {
        let e = pred[v].expect("target reachable");
        path.push(e);
        v = inst.edges()[e].other(v);
    }
    path.reverse();
    path
}

/// Scaled integer view of nominal lengths, deviations and thresholds.
struct Scaled<W> {
    denom: BigInt,
    nominal: Vec<W>,
    deviation: Vec<W>,
    /// Distinct thresholds, ascending; always starts with 0.
    thetas: Vec<W>,
}

impl<W: Weight> Scaled<W> {
    fn build(
        nominal: &[Rational],
        deviation: &[Rational],
        denom: BigInt,
        conv: impl Fn(&Rational) -> W,
    ) -> Self {
        let nominal: Vec<W> = nominal.iter().map(&conv).collect();
        let deviation: Vec<W> = deviation.iter().map(&conv).collect();
        let mut thetas: Vec<W> = std::iter::once(W::zero())
            .chain(deviation.iter().cloned())
            .collect();
        thetas.sort();
        thetas.dedup();
        Scaled {
            denom,
            nominal,
            deviation,
            thetas,
        }
    }

    fn lengths_at(&self, theta: &W) -> Vec<W> {
        self.nominal
            .iter()
            .zip(&self.deviation)
            .map(|(c, d)| {
                if d > theta {
                    c.clone() + (d.clone() - theta.clone())
                } else {
                    c.clone()
                }
            })
            .collect()
    }

    /// Robust distances from `source` plus the index of the minimising threshold.
    fn robust_from(
        &self,
        inst: &NetworkInstance,
        gamma: usize,
        source: usize,
    ) -> Vec<Option<(W, usize)>> {
        let mut best: Vec<Option<(W, usize)>> = vec![None; inst.n()];
        for (k, theta) in self.thetas.iter().enumerate() {
            let tree = dijkstra(inst, &self.lengths_at(theta), source);
            let offset = theta.times(gamma);
            for (slot, d) in best.iter_mut().zip(tree.dist) {
                if let Some(d) = d {
                    let candidate = offset.clone() + d;
                    if slot.as_ref().is_none_or(|(cur, _)| candidate < *cur) {
                        *slot = Some((candidate, k));
                    }
                }
            }
        }
        best
    }

    fn certificate(
        &self,
        inst: &NetworkInstance,
        gamma: usize,
        p: usize,
        q: usize,
        theta_idx: usize,
    ) -> Certificate {
        let tree = dijkstra(inst, &self.lengths_at(&self.thetas[theta_idx]), p);
        let path = walk_back(inst, &tree.pred, p, q);
        let mut ranked: Vec<usize> = path.clone();
        ranked.sort_by(|&a, &b| self.deviation[b].cmp(&self.deviation[a]).then(a.cmp(&b)));
        let mut attacked: Vec<usize> = ranked.into_iter().take(gamma).collect();
        attacked.sort_unstable();
        let mut value = W::zero();
        for &e in &path {
            value = value + self.nominal[e].clone();
        }
        for &e in &attacked {
            value = value + self.deviation[e].clone();
        }
        Certificate {
            source: p,
            target: q,
            path,
            attacked,
            value: value.to_rational(&self.denom),
        }
    }
}

/// Dispatches to an `i128` or big-integer kernel depending on magnitudes.
enum Kernel {
    Small(Scaled<i128>),
    Big(Scaled<BigInt>),
}

impl Kernel {
    fn new(
        inst: &NetworkInstance,
        nominal: &[Rational],
        deviation: &[Rational],
        gamma: usize,
    ) -> Self {
        let denom = common_denominator(nominal.iter().chain(deviation));
        let small: Option<Vec<i128>> = nominal
            .iter()
            .chain(deviation)
            .map(|v| scale_to_i128(v, &denom))
            .collect();
        // Path sums add at most n nominal terms, n deviation terms and γ·θ.
        let headroom = (2 * inst.n() + gamma + 2) as i128;
        if let Some(values) = small {
            let max = values.iter().map(|v| v.abs()).max().unwrap_or(0);
            if max.checked_mul(headroom).is_some() {
                return Kernel::Small(Scaled::build(nominal, deviation, denom.clone(), |v| {
                    scale_to_i128(v, &denom).expect("checked above")
                }));
            }
        }
        let big_denom = denom.clone();
        Kernel::Big(Scaled::build(nominal, deviation, denom, move |v| {
            (v * Rational::from_integer(big_denom.clone())).to_integer()
        }))
    }

    fn robust_from(
        &self,
        inst: &NetworkInstance,
        gamma: usize,
        source: usize,
    ) -> Vec<Option<(Rational, usize)>> {
        match self {
            Kernel::Small(s) => s
                .robust_from(inst, gamma, source)
                .into_iter()
                .map(|o| o.map(|(d, k)| (d.to_rational(&s.denom), k)))
                .collect(),
            Kernel::Big(s) => s
                .robust_from(inst, gamma, source)
                .into_iter()
                .map(|o| o.map(|(d, k)| (d.to_rational(&s.denom), k)))
                .collect(),
        }
    }

    fn certificate(
        &self,
        inst: &NetworkInstance,
        gamma: usize,
        p: usize,
        q: usize,
        theta_idx: usize,
    ) -> Certificate {
        match self {
            Kernel::Small(s) => s.certificate(inst, gamma, p, q, theta_idx),
            Kernel::Big(s) => s.certificate(inst, gamma, p, q, theta_idx),
        }
    }

    fn threshold_count(&self) -> usize {
        match self {
            Kernel::Small(s) => s.thetas.len(),
            Kernel::Big(s) => s.thetas.len(),
        }
    }
}

// ---------------------------------------------------------------------------
// Public operations

fn check_lengths(inst: &NetworkInstance, values: &[Rational], what: &str) -> Result<()> {
    if values.len() != inst.edges().len() {
        return Err(Error::InvalidArgument(format!(
            "expected one {what} per edge ({}), got {}",
            inst.edges().len(),
            values.len()
        )));
    }
    if values.iter().any(|v| *v < Rational::zero()) {
        return Err(Error::InvalidArgument(format!("negative {what}")));
    }
    Ok(())
}

fn check_pair(inst: &NetworkInstance, p: usize, q: usize) -> Result<()> {
    if p >= inst.n() || q >= inst.n() {
        return Err(Error::InvalidArgument(format!(
            "node pair ({p}, {q}) out of range"
        )));
    }
    if p == q {
        return Err(Error::InvalidArgument(
            "robust distance needs distinct endpoints".into(),
        ));
    }
    Ok(())
}

/// Exact all-pairs shortest distances under `lengths` (one per edge).
pub fn nominal_shortest_paths(
    inst: &NetworkInstance,
    lengths: &[Rational],
) -> Result<RobustDistanceMatrix> {
    check_lengths(inst, lengths, "length")?;
    let zeros = vec![Rational::zero(); lengths.len()];
    Ok(robust_matrix(inst, lengths, &zeros, 0, None))
}

fn robust_matrix(
    inst: &NetworkInstance,
    nominal: &[Rational],
    deviation: &[Rational],
    gamma: usize,
    regime: Option<Regime>,
) -> RobustDistanceMatrix {
    let kernel = Kernel::new(inst, nominal, deviation, gamma);
    let dist = (0..inst.n())
        .map(|p| {
            kernel
                .robust_from(inst, gamma, p)
                .into_iter()
                .map(|o| o.map(|(d, _)| d))
                .collect()
        })
        .collect();
    RobustDistanceMatrix { regime, dist }
}

/// All-pairs budget-robust distances with per-edge `deviation` and budget `gamma`.
pub fn robust_all_pairs(
    inst: &NetworkInstance,
    deviation: &[Rational],
    gamma: usize,
) -> Result<RobustDistanceMatrix> {
    check_lengths(inst, deviation, "deviation")?;
    Ok(robust_matrix(
        inst,
        &inst.nominal_lengths(),
        deviation,
        gamma,
        None,
    ))
}

/// Budget-robust distances from `source` to every node.
pub fn robust_row(
    inst: &NetworkInstance,
    deviation: &[Rational],
    source: usize,
    gamma: usize,
) -> Result<Vec<Option<Rational>>> {
    if source >= inst.n() {
        return Err(Error::InvalidArgument(format!(
            "node {source} out of range"
        )));
    }
    check_lengths(inst, deviation, "deviation")?;
    let kernel = Kernel::new(inst, &inst.nominal_lengths(), deviation, gamma);
    Ok(kernel
        .robust_from(inst, gamma, source)
        .into_iter()
        .map(|o| o.map(|(d, _)| d))
        .collect())
}

/// Budget-robust distance between `p` and `q` over the full deviations `d_e`.
pub fn robust_sp_static(
    inst: &NetworkInstance,
    p: usize,
    q: usize,
    gamma: usize,
) -> Result<Option<Rational>> {
    robust_pair(inst, &inst.max_deviations(), p, q, gamma)
}

/// Budget-robust distance between `p` and `q` with explicit per-edge deviations.
pub fn robust_pair(
    inst: &NetworkInstance,
    deviation: &[Rational],
    p: usize,
    q: usize,
    gamma: usize,
) -> Result<Option<Rational>> {
    check_pair(inst, p, q)?;
    check_lengths(inst, deviation, "deviation")?;
    let kernel = Kernel::new(inst, &inst.nominal_lengths(), deviation, gamma);
    Ok(kernel.robust_from(inst, gamma, p)[q].take().map(|(d, _)| d))
}

/// Worst period of the per-period robust distances with budget `Γ_e`.
pub fn robust_sp_dynamic(inst: &NetworkInstance, p: usize, q: usize) -> Result<Option<Rational>> {
    check_pair(inst, p, q)?;
    let mut worst: Option<Option<Rational>> = None;
    for t in 0..inst.horizon() {
        let d = robust_pair(inst, &inst.period_deviations(t), p, q, inst.gamma_e())?;
        worst = Some(match (worst, d) {
            (None, d) => d,
            (Some(Some(a)), Some(b)) => Some(if b > a { b } else { a }),
            _ => None,
        });
    }
    Ok(worst.flatten())
}

/// Number of thresholds the decomposition evaluates for `deviation`.
pub fn threshold_count(inst: &NetworkInstance, deviation: &[Rational]) -> usize {
    Kernel::new(inst, &inst.nominal_lengths(), deviation, 0).threshold_count()
}

/// Per-period robust distances for an explicit `[t][e]` deviation table.
pub fn period_matrices(
    inst: &NetworkInstance,
    table: &[Vec<Rational>],
    gamma: usize,
) -> Result<Vec<RobustDistanceMatrix>> {
    table
        .iter()
        .map(|row| robust_all_pairs(inst, row, gamma))
        .collect()
}

/// Certified distances of a regime.
pub fn regime_distances(inst: &NetworkInstance, regime: Regime) -> RobustDistanceMatrix {
    let nominal = inst.nominal_lengths();
    match regime {
        Regime::Dwc => {
            let upper: Vec<Rational> = inst
                .edges()
                .iter()
                .map(|e| &e.nominal_length + &e.max_deviation)
                .collect();
            let zeros = vec![Rational::zero(); upper.len()];
            robust_matrix(inst, &upper, &zeros, 0, Some(regime))
        }
        Regime::Rsb => robust_matrix(
            inst,
            &nominal,
            &inst.max_deviations(),
            inst.gamma_e(),
            Some(regime),
        ),
        Regime::Rdb => {
            let mut worst = robust_matrix(
                inst,
                &nominal,
                &inst.period_deviations(0),
                inst.gamma_e(),
                Some(regime),
            );
            for t in 1..inst.horizon() {
                worst.max_with(&robust_matrix(
                    inst,
                    &nominal,
                    &inst.period_deviations(t),
                    inst.gamma_e(),
                    None,
                ));
            }
            worst
        }
    }
}

/// Graph whose edges are the pairs certified within `d_max` in every period of
/// `table` (robust with budget `gamma`).
pub fn worst_period_graph(
    inst: &NetworkInstance,
    table: &[Vec<Rational>],
    gamma: usize,
) -> Result<TransformedGraph> {
    let per_period: Vec<TransformedGraph> = period_matrices(inst, table, gamma)?
        .iter()
        .map(|m| TransformedGraph::from_distances(m, inst.d_max()))
        .collect();
    TransformedGraph::intersection(&per_period)
        .ok_or_else(|| Error::InvalidArgument("deviation table has no periods".into()))
}

/// Builds `M` for a regime; fails if it is disconnected.
pub fn build_transformed_graph(inst: &NetworkInstance, regime: Regime) -> Result<TransformedGraph> {
    let m = TransformedGraph::from_distances(&regime_distances(inst, regime), inst.d_max());
    if !m.is_connected() {
        return Err(Error::InfeasibleInstance(format!(
            "{regime} communication graph is disconnected"
        )));
    }
    Ok(m)
}

/// A worst-case route between two nodes: the path attaining the robust
/// distance and the attack set on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub source: usize,
    pub target: usize,
    /// Edge ids from `source` to `target`.
    pub path: Vec<usize>,
    /// The `γ` largest deviations on the path (ties by lowest edge id), ascending ids.
    pub attacked: Vec<usize>,
    pub value: Rational,
}

/// Certificates for `pairs` under per-edge `deviation` and budget `gamma`.
/// Unreachable pairs are skipped.
pub fn certificates(
    inst: &NetworkInstance,
    deviation: &[Rational],
    gamma: usize,
    pairs: &[(usize, usize)],
) -> Result<Vec<Certificate>> {
    check_lengths(inst, deviation, "deviation")?;
    let kernel = Kernel::new(inst, &inst.nominal_lengths(), deviation, gamma);
    let mut sorted: Vec<(usize, usize)> = pairs.to_vec();
    sorted.sort_unstable();
    let mut out = Vec::with_capacity(sorted.len());
    let mut i = 0;
    while i < sorted.len() {
        let p = sorted[i].0;
        let from_p = kernel.robust_from(inst, gamma, p);
        while i < sorted.len() && sorted[i].0 == p {
            let q = sorted[i].1;
            check_pair(inst, p, q)?;
            if let Some((value, k)) = &from_p[q] {
                let cert = kernel.certificate(inst, gamma, p, q, *k);
                debug_assert_eq!(&cert.value, value);
                out.push(cert);
            }
            i += 1;
        }
    }
    Ok(out)
}

/// Edge count of a matrix below `d_max`, for diagnostics.
pub fn certified_pair_count(matrix: &RobustDistanceMatrix, d_max: &Rational) -> usize {
    let n = matrix.n();
    (0..n)
        .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
        .filter(|&(p, q)| matrix.get(p, q).is_some_and(|d| d <= d_max))
        .count()
}
