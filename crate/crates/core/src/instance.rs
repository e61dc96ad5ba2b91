//! Problem data: nodes with uncertain installation costs, edges with uncertain
//! per-period lengths, adversary budgets and the seeded random generator.

use std::collections::BTreeSet;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::rational::{int, ratio, Rational};
use crate::{Error, NodeSet, Result};

/// Consecutive disconnected samples tolerated by [`generate_instance`].
pub const MAX_GENERATION_ATTEMPTS: u32 = 1000;

pub const DEFAULT_HORIZON: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeData {
    pub id: usize,
    pub nominal_cost: Rational,
    pub max_deviation: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeData {
    pub u: usize,
    pub v: usize,
    pub nominal_length: Rational,
    pub max_deviation: Rational,
    /// Per-period deviation realisation `d_e^t`, each within `[0, max_deviation]`.
    pub period_caps: Vec<Rational>,
}

impl EdgeData {
    pub fn other(&self, node: usize) -> usize {
        if node == self.u {
            self.v
        } else {
            self.u
        }
    }

    pub fn endpoints(&self) -> (usize, usize) {
        (self.u.min(self.v), self.u.max(self.v))
    }
}

/// A validated, immutable problem instance.
///
/// Edges are stored with `u < v`, sorted by endpoints; an edge id is its index
/// in [`NetworkInstance::edges`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkInstance {
    nodes: Vec<NodeData>,
    edges: Vec<EdgeData>,
    d_max: Rational,
    gamma_e: usize,
    gamma_v: usize,
    horizon: usize,
    seed: u64,
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl NetworkInstance {
    /// Validates and normalises the data. Edges longer than `d_max` are
    /// dropped before the connectivity check.
    pub fn new(
        nodes: Vec<NodeData>,
        edges: Vec<EdgeData>,
        d_max: Rational,
        gamma_e: usize,
        gamma_v: usize,
        horizon: usize,
        seed: u64,
    ) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::validation("nodes", "at least one node is required"));
        }
        if d_max <= Rational::zero() {
            return Err(Error::validation("meta.d_max", "must be positive"));
        }
        if horizon == 0 {
            return Err(Error::validation("meta.horizon", "must be at least 1"));
        }
        let n = nodes.len();
        for (i, node) in nodes.iter().enumerate() {
            if node.id != i {
                return Err(Error::validation(
                    format!("nodes[{i}].id"),
                    format!("expected dense id {i}, found {}", node.id),
                ));
            }
            if node.nominal_cost < Rational::zero() {
                return Err(Error::validation(
                    format!("nodes[{i}].cost"),
                    "must be nonnegative",
                ));
            }
            if node.max_deviation < Rational::zero() {
                return Err(Error::validation(
                    format!("nodes[{i}].dev"),
                    "must be nonnegative",
                ));
            }
        }

        let mut seen = BTreeSet::new();
        let mut kept = Vec::with_capacity(edges.len());
        for (i, mut edge) in edges.into_iter().enumerate() {
            if edge.u >= n || edge.v >= n {
                return Err(Error::validation(
                    format!("edges[{i}]"),
                    "endpoint out of range",
                ));
            }
            if edge.u == edge.v {
                return Err(Error::validation(
                    format!("edges[{i}]"),
                    "endpoints must be distinct",
                ));
            }
            (edge.u, edge.v) = edge.endpoints();
            if !seen.insert((edge.u, edge.v)) {
                return Err(Error::validation(
                    format!("edges[{i}]"),
                    format!("parallel edge ({}, {})", edge.u, edge.v),
                ));
            }
            if edge.nominal_length < Rational::zero() {
                return Err(Error::validation(
                    format!("edges[{i}].len"),
                    "must be nonnegative",
                ));
            }
            if edge.max_deviation < Rational::zero() {
                return Err(Error::validation(
                    format!("edges[{i}].dev"),
                    "must be nonnegative",
                ));
            }
            if edge.period_caps.len() != horizon {
                return Err(Error::validation(
                    format!("edges[{i}].period_caps"),
                    format!(
                        "expected {horizon} entries, found {}",
                        edge.period_caps.len()
                    ),
                ));
            }
            if let Some(t) = edge
                .period_caps
                .iter()
                .position(|c| *c < Rational::zero() || *c > edge.max_deviation)
            {
                return Err(Error::validation(
                    format!("edges[{i}].period_caps[{t}]"),
                    "must lie in [0, dev]",
                ));
            }
            if edge.nominal_length <= d_max {
                kept.push(edge);
            }
        }
        kept.sort_by_key(|e| (e.u, e.v));

        let mut adjacency = vec![Vec::new(); n];
        for (id, e) in kept.iter().enumerate() {
            adjacency[e.u].push((e.v, id));
            adjacency[e.v].push((e.u, id));
        }
        if !graph_connected(&adjacency) {
            return Err(Error::validation("edges", "the network is not connected"));
        }

        Ok(NetworkInstance {
            nodes,
            edges: kept,
            d_max,
            gamma_e,
            gamma_v,
            horizon,
            seed,
            adjacency,
        })
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[NodeData] {
        &self.nodes
    }

    pub fn edges(&self) -> &[EdgeData] {
        &self.edges
    }

    pub fn d_max(&self) -> &Rational {
        &self.d_max
    }

    pub fn gamma_e(&self) -> usize {
        self.gamma_e
    }

    pub fn gamma_v(&self) -> usize {
        self.gamma_v
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `(neighbor, edge id)` pairs of `node`, in edge-id order.
    pub fn neighbors(&self, node: usize) -> &[(usize, usize)] {
        &self.adjacency[node]
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency[a]
            .iter()
            .find(|&&(other, _)| other == b)
            .map(|&(_, id)| id)
    }

    pub fn nominal_lengths(&self) -> Vec<Rational> {
        self.edges
            .iter()
            .map(|e| e.nominal_length.clone())
            .collect()
    }

    pub fn max_deviations(&self) -> Vec<Rational> {
        self.edges.iter().map(|e| e.max_deviation.clone()).collect()
    }

    /// Edge deviations `d_e^t` of period `t`.
    pub fn period_deviations(&self, t: usize) -> Vec<Rational> {
        self.edges
            .iter()
            .map(|e| e.period_caps[t].clone())
            .collect()
    }

    /// `[t][e]` table of the per-period deviations.
    pub fn deviation_table(&self) -> Vec<Vec<Rational>> {
        (0..self.horizon)
            .map(|t| self.period_deviations(t))
            .collect()
    }

    pub fn with_budgets(&self, gamma_e: usize, gamma_v: usize) -> Self {
        NetworkInstance {
            gamma_e,
            gamma_v,
            ..self.clone()
        }
    }

    /// Same network with every period cap replaced by `caps[t][e]`.
    pub fn with_period_caps(&self, caps: &[Vec<Rational>]) -> Result<Self> {
        let edges = self
            .edges
            .iter()
            .enumerate()
            .map(|(e, edge)| EdgeData {
                period_caps: caps.iter().map(|row| row[e].clone()).collect(),
                ..edge.clone()
            })
            .collect();
        NetworkInstance::new(
            self.nodes.clone(),
            edges,
            self.d_max.clone(),
            self.gamma_e,
            self.gamma_v,
            caps.len(),
            self.seed,
        )
    }

    /// Nominal cost of a placement (no node attacked).
    pub fn nominal_cost(&self, placement: &NodeSet) -> Rational {
        placement
            .iter()
            .map(|v| &self.nodes[v].nominal_cost)
            .fold(Rational::zero(), |acc, c| acc + c)
    }
}

pub(crate) fn graph_connected(adjacency: &[Vec<(usize, usize)>]) -> bool {
    let n = adjacency.len();
    if n == 0 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &(w, _) in &adjacency[v] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count == n
}

/// Mixes `stream` into `base` (SplitMix64 finaliser). Used for every derived
/// seed so that resampling and experiment cells are reproducible.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Parameters of [`generate_instance`].
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorParams {
    pub n: usize,
    pub density: f64,
    pub d_max: Rational,
    pub gamma_e: usize,
    pub gamma_v: usize,
    pub horizon: usize,
    pub seed: u64,
}

impl GeneratorParams {
    /// The experimental defaults: `d_max = 1000`, density 0.3, three periods.
    pub fn new(n: usize, gamma_e: usize, gamma_v: usize, seed: u64) -> Self {
        GeneratorParams {
            n,
            density: 0.3,
            d_max: int(1000),
            gamma_e,
            gamma_v,
            horizon: DEFAULT_HORIZON,
            seed,
        }
    }
}

/// Erdős–Rényi network with integer lengths in `350..=600`, edge deviations
/// in `1..=250`, node costs in `250..=300` and node deviations in `1..=50`.
/// Period caps are uniform multiples of `1/1000` in `[0, dev]`. Disconnected
/// samples are redrawn from a derived seed.
pub fn generate_instance(params: &GeneratorParams) -> Result<NetworkInstance> {
    if params.n < 2 {
        return Err(Error::InvalidArgument(format!(
            "n must be at least 2, got {}",
            params.n
        )));
    }
    if !(params.density > 0.0 && params.density <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "density must lie in (0, 1], got {}",
            params.density
        )));
    }
    if params.horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    if params.d_max <= Rational::zero() {
        return Err(Error::InvalidArgument("d_max must be positive".into()));
    }
    for attempt in 0..MAX_GENERATION_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(params.seed, u64::from(attempt)));
        match sample(params, &mut rng) {
            Ok(instance) => return Ok(instance),
            Err(Error::Validation { .. }) => continue,
            Err(other) => return Err(other),
        }
    }
    Err(Error::GenerationFailure {
        attempts: MAX_GENERATION_ATTEMPTS,
    })
}

fn sample(params: &GeneratorParams, rng: &mut ChaCha8Rng) -> Result<NetworkInstance> {
    let n = params.n;
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if !rng.random_bool(params.density) {
                continue;
            }
            let len: i64 = rng.random_range(350..=600);
            let dev: i64 = rng.random_range(1..=250);
            let period_caps = (0..params.horizon)
                .map(|_| ratio(rng.random_range(0..=dev * 1000), 1000))
                .collect();
            edges.push(EdgeData {
                u,
                v,
                nominal_length: int(len),
                max_deviation: int(dev),
                period_caps,
            });
        }
    }
    let nodes = (0..n)
        .map(|id| NodeData {
            id,
            nominal_cost: int(rng.random_range(250..=300)),
            max_deviation: int(rng.random_range(1..=50)),
        })
        .collect();
    NetworkInstance::new(
        nodes,
        edges,
        params.d_max.clone(),
        params.gamma_e,
        params.gamma_v,
        params.horizon,
        params.seed,
    )
}

/// One adversary realisation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Scenario {
    /// Attacked nodes, ascending.
    pub node_attacks: Vec<usize>,
    /// Attacked edge ids per period, ascending.
    pub edge_attacks: Vec<Vec<usize>>,
    /// Realised deviation of each attacked edge, aligned with `edge_attacks`.
    pub deviation_levels: Vec<Vec<Rational>>,
}

impl Scenario {
    pub fn nodes_only(node_attacks: Vec<usize>, horizon: usize) -> Self {
        Scenario {
            node_attacks,
            edge_attacks: vec![Vec::new(); horizon],
            deviation_levels: vec![Vec::new(); horizon],
        }
    }

    pub fn validate(&self, inst: &NetworkInstance) -> Result<()> {
        if self.node_attacks.len() > inst.gamma_v() {
            return Err(Error::validation("node_attacks", "exceeds gamma_v"));
        }
        if self.node_attacks.iter().any(|&v| v >= inst.n()) {
            return Err(Error::validation("node_attacks", "node out of range"));
        }
        let distinct: BTreeSet<_> = self.node_attacks.iter().collect();
        if distinct.len() != self.node_attacks.len() {
            return Err(Error::validation("node_attacks", "duplicate node"));
        }
        if self.edge_attacks.len() != inst.horizon()
            || self.deviation_levels.len() != inst.horizon()
        {
            return Err(Error::validation(
                "edge_attacks",
                "one entry per period required",
            ));
        }
        for (t, (attacks, levels)) in self
            .edge_attacks
            .iter()
            .zip(&self.deviation_levels)
            .enumerate()
        {
            if attacks.len() > inst.gamma_e() {
                return Err(Error::validation(
                    format!("edge_attacks[{t}]"),
                    "exceeds gamma_e",
                ));
            }
            if attacks.len() != levels.len() {
                return Err(Error::validation(
                    format!("deviation_levels[{t}]"),
                    "must align with edge_attacks",
                ));
            }
            let distinct: BTreeSet<_> = attacks.iter().collect();
            if distinct.len() != attacks.len() {
                return Err(Error::validation(
                    format!("edge_attacks[{t}]"),
                    "duplicate edge",
                ));
            }
            for (&e, level) in attacks.iter().zip(levels) {
                let Some(edge) = inst.edges().get(e) else {
                    return Err(Error::validation(
                        format!("edge_attacks[{t}]"),
                        "edge out of range",
                    ));
                };
                if *level < Rational::zero() || *level > edge.period_caps[t] {
                    return Err(Error::validation(
                        format!("deviation_levels[{t}]"),
                        "outside [0, period cap]",
                    ));
                }
            }
        }
        Ok(())
    }

    /// Node cost of `placement` under this scenario.
    pub fn cost(&self, placement: &NodeSet, inst: &NetworkInstance) -> Rational {
        let mut total = inst.nominal_cost(placement);
        for &v in &self.node_attacks {
            if placement.contains(v) {
                total += &inst.nodes()[v].max_deviation;
            }
        }
        total
    }
}
