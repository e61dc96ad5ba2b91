//! Brute-force reference implementations for small instances. Nothing here
//! calls the library's algorithms; only its data types are used.
#![allow(dead_code)]

use std::collections::VecDeque;

use num_traits::Zero;
use regenloc::{NetworkInstance, Rational};

/// Every simple path from `p` to `q`, as edge-id lists.
pub fn simple_paths(inst: &NetworkInstance, p: usize, q: usize) -> Vec<Vec<usize>> {
    paths_within(inst, p, q, None)
}

/// Simple paths whose total under `bound.0` stays within `bound.1`.
pub fn paths_within(
    inst: &NetworkInstance,
    p: usize,
    q: usize,
    bound: Option<(&[Rational], &Rational)>,
) -> Vec<Vec<usize>> {
    struct Walk<'a> {
        inst: &'a NetworkInstance,
        q: usize,
        bound: Option<(&'a [Rational], &'a Rational)>,
        seen: Vec<bool>,
        path: Vec<usize>,
        out: Vec<Vec<usize>>,
    }
    fn walk(w: &mut Walk<'_>, at: usize, used: Rational) {
        if at == w.q {
            w.out.push(w.path.clone());
            return;
        }
        for (e, edge) in w.inst.edges().iter().enumerate() {
            let next = if edge.u == at {
                edge.v
            } else if edge.v == at {
                edge.u
            } else {
                continue;
            };
            if w.seen[next] {
                continue;
            }
            let total = match w.bound {
                Some((lengths, limit)) => {
                    let t = &used + &lengths[e];
                    if &t > limit {
                        continue;
                    }
                    t
                }
                None => used.clone(),
            };
            w.seen[next] = true;
            w.path.push(e);
            walk(w, next, total);
            w.path.pop();
            w.seen[next] = false;
        }
    }
    let mut w = Walk {
        inst,
        q,
        bound,
        seen: vec![false; inst.n()],
        path: Vec::new(),
        out: Vec::new(),
    };
    w.seen[p] = true;
    walk(&mut w, p, Rational::zero());
    w.out
}

/// All subsets of `items` with at most `k` members.
pub fn subsets_up_to<T: Clone>(items: &[T], k: usize) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for item in items {
        let extended: Vec<Vec<T>> = out
            .iter()
            .filter(|s| s.len() < k)
            .map(|s| {
                let mut s = s.clone();
                s.push(item.clone());
                s
            })
            .collect();
        out.extend(extended);
    }
    out
}

/// min over simple paths of max over attacks of at most `gamma` edges.
pub fn robust_by_enumeration(
    inst: &NetworkInstance,
    lengths: &[Rational],
    deviation: &[Rational],
    p: usize,
    q: usize,
    gamma: usize,
) -> Option<Rational> {
    robust_within(inst, lengths, deviation, p, q, gamma, None)
}

/// Like [`robust_by_enumeration`] but only over paths whose nominal total is
/// at most `limit`; exact whenever the true value is at most `limit`.
pub fn robust_within(
    inst: &NetworkInstance,
    lengths: &[Rational],
    deviation: &[Rational],
    p: usize,
    q: usize,
    gamma: usize,
    limit: Option<&Rational>,
) -> Option<Rational> {
    paths_within(inst, p, q, limit.map(|l| (lengths, l)))
        .into_iter()
        .map(|path| {
            let base: Rational = path
                .iter()
                .fold(Rational::zero(), |acc, &e| acc + &lengths[e]);
            subsets_up_to(&path, gamma)
                .into_iter()
                .map(|attack| {
                    attack
                        .iter()
                        .fold(base.clone(), |acc, &e| acc + &deviation[e])
                })
                .max()
                .expect("empty attack always present")
        })
        .min()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Dwc,
    Rsb,
    Rdb,
}

/// Regime distance between `p` and `q` by enumeration.
pub fn regime_distance(
    inst: &NetworkInstance,
    regime: Regime,
    p: usize,
    q: usize,
) -> Option<Rational> {
    regime_distance_within(inst, regime, p, q, None)
}

fn regime_distance_within(
    inst: &NetworkInstance,
    regime: Regime,
    p: usize,
    q: usize,
    limit: Option<&Rational>,
) -> Option<Rational> {
    let nominal: Vec<Rational> = inst
        .edges()
        .iter()
        .map(|e| e.nominal_length.clone())
        .collect();
    match regime {
        Regime::Dwc => {
            let upper: Vec<Rational> = inst
                .edges()
                .iter()
                .map(|e| &e.nominal_length + &e.max_deviation)
                .collect();
            let zeros = vec![Rational::zero(); upper.len()];
            robust_within(inst, &upper, &zeros, p, q, 0, limit)
        }
        Regime::Rsb => {
            let dev: Vec<Rational> = inst
                .edges()
                .iter()
                .map(|e| e.max_deviation.clone())
                .collect();
            robust_within(inst, &nominal, &dev, p, q, inst.gamma_e(), limit)
        }
        Regime::Rdb => (0..inst.horizon())
            .map(|t| {
                let dev: Vec<Rational> = inst
                    .edges()
                    .iter()
                    .map(|e| e.period_caps[t].clone())
                    .collect();
                robust_within(inst, &nominal, &dev, p, q, inst.gamma_e(), limit)
            })
            .try_fold(None::<Rational>, |acc, d| {
                let d = d?;
                Some(Some(match acc {
                    Some(a) if a >= d => a,
                    _ => d,
                }))
            })
            .flatten(),
    }
}

/// Adjacency matrix of the transformed graph, by enumeration.
pub fn transformed_adjacency(inst: &NetworkInstance, regime: Regime) -> Vec<Vec<bool>> {
    let n = inst.n();
    let mut adj = vec![vec![false; n]; n];
    for p in 0..n {
        for q in p + 1..n {
            let ok = regime_distance_within(inst, regime, p, q, Some(inst.d_max()))
                .is_some_and(|d| &d <= inst.d_max());
            adj[p][q] = ok;
            adj[q][p] = ok;
        }
    }
    adj
}

pub fn members(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|&v| mask >> v & 1 == 1).collect()
}

/// Every pair of nodes can exchange one unit of flow in `adj` when only
/// selected nodes may relay. Checked pair by pair with a node-split max-flow.
pub fn flow_feasible(adj: &[Vec<bool>], selected: &[bool]) -> bool {
    let n = adj.len();
    for p in 0..n {
        for q in p + 1..n {
            if max_flow_between(adj, selected, p, q) < 1 {
                return false;
            }
        }
    }
    true
}

/// Max flow from `p` to `q`; node `v` has capacity 1 if selected (or an
/// endpoint), 0 otherwise. Node `v` is split into `2v` (in) and `2v+1` (out).
fn max_flow_between(adj: &[Vec<bool>], selected: &[bool], p: usize, q: usize) -> i64 {
    let n = adj.len();
    let size = 2 * n;
    let mut cap = vec![vec![0i64; size]; size];
    for v in 0..n {
        cap[2 * v][2 * v + 1] = if v == p || v == q {
            n as i64
        } else if selected[v] {
            1
        } else {
            0
        };
        for w in 0..n {
            if adj[v][w] {
                cap[2 * v + 1][2 * w] = n as i64;
            }
        }
    }
    let (s, t) = (2 * p + 1, 2 * q);
    let mut flow = 0;
    loop {
        let mut parent = vec![usize::MAX; size];
        parent[s] = s;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for v in 0..size {
                if parent[v] == usize::MAX && cap[u][v] > 0 {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if parent[t] == usize::MAX {
            return flow;
        }
        let mut bottleneck = i64::MAX;
        let mut v = t;
        while v != s {
            bottleneck = bottleneck.min(cap[parent[v]][v]);
            v = parent[v];
        }
        let mut v = t;
        while v != s {
            cap[parent[v]][v] -= bottleneck;
            cap[v][parent[v]] += bottleneck;
            v = parent[v];
        }
        flow += bottleneck;
    }
}

/// Connected dominating set test by plain graph search.
pub fn is_cds(adj: &[Vec<bool>], set: &[usize]) -> bool {
    let n = adj.len();
    if set.is_empty() {
        return false;
    }
    let inside: Vec<bool> = (0..n).map(|v| set.contains(&v)).collect();
    let dominated = (0..n).all(|v| inside[v] || set.iter().any(|&s| adj[v][s]));
    let mut seen = vec![false; n];
    let mut stack = vec![set[0]];
    seen[set[0]] = true;
    while let Some(u) = stack.pop() {
        for &w in set {
            if !seen[w] && adj[u][w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    dominated && set.iter().all(|&s| seen[s])
}

/// Cost under the worst node attack: max over all attack sets of at most
/// `gamma_v` nodes.
pub fn worst_cost(inst: &NetworkInstance, set: &[usize]) -> Rational {
    let all: Vec<usize> = (0..inst.n()).collect();
    let nominal: Rational = set.iter().fold(Rational::zero(), |acc, &v| {
        acc + &inst.nodes()[v].nominal_cost
    });
    subsets_up_to(&all, inst.gamma_v())
        .into_iter()
        .map(|z| {
            z.iter()
                .filter(|v| set.contains(v))
                .fold(nominal.clone(), |acc, &v| {
                    acc + &inst.nodes()[v].max_deviation
                })
        })
        .max()
        .expect("empty attack always present")
}

/// min over connected dominating sets of `cost`; ties go to the set holding
/// the lowest id where two optima differ.
pub fn min_over_cds(
    adj: &[Vec<bool>],
    cost: impl Fn(&[usize]) -> Rational,
) -> Option<(Vec<usize>, Rational)> {
    let n = adj.len();
    let mut best: Option<(Vec<usize>, Rational)> = None;
    for mask in 1u32..(1 << n) {
        let set = members(mask, n);
        if !is_cds(adj, &set) {
            continue;
        }
        let c = cost(&set);
        let better = match &best {
            None => true,
            Some((b, bc)) => c < *bc || (c == *bc && earlier(&set, b, n)),
        };
        if better {
            best = Some((set, c));
        }
    }
    best
}

fn earlier(a: &[usize], b: &[usize], n: usize) -> bool {
    for v in 0..n {
        let (x, y) = (a.contains(&v), b.contains(&v));
        if x != y {
            return x;
        }
    }
    false
}

/// Brute-force min over feasible placements of max over node attacks.
pub fn minmax(inst: &NetworkInstance, adj: &[Vec<bool>]) -> Option<Rational> {
    min_over_cds(adj, |s| worst_cost(inst, s)).map(|(_, c)| c)
}
