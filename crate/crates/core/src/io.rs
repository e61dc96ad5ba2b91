//! Instance file format.
//!
//! A JSON document with three top-level fields:
//!
//! ```json
//! {
//!   "meta":  { "n": 3, "d_max": 1000, "gamma_e": 2, "gamma_v": 2, "horizon": 1, "seed": 7 },
//!   "nodes": [ { "id": 0, "cost": 250, "dev": 10 }, ... ],
//!   "edges": [ { "u": 0, "v": 1, "len": 400, "dev": 12, "period_caps": [3.5] }, ... ]
//! }
//! ```
//!
//! Rational fields are written as JSON numbers when they have a finite decimal
//! expansion and as `"p/q"` strings otherwise; both forms are accepted on
//! input. Unknown fields are rejected.

use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::rational::{format_rational, parse_rational, Rational};
use crate::{EdgeData, Error, NetworkInstance, NodeData, Result};

/// A rational read from / written to JSON without passing through `f64`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exact(pub Rational);

impl Serialize for Exact {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let text = format_rational(&self.0);
        if text.contains('/') {
            serializer.serialize_str(&text)
        } else {
            serde_json::Number::from_str(&text)
                .map_err(serde::ser::Error::custom)?
                .serialize(serializer)
        }
    }
}

impl<'de> Deserialize<'de> for Exact {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(deserializer)?;
        let text = match &value {
            serde_json::Value::Number(n) => n.to_string(),
            serde_json::Value::String(s) => s.clone(),
            _ => return Err(D::Error::custom("expected a number or a rational string")),
        };
        parse_rational(&text)
            .map(Exact)
            .ok_or_else(|| D::Error::custom(format!("invalid rational `{text}`")))
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    meta: MetaRecord,
    nodes: Vec<NodeRecord>,
    edges: Vec<EdgeRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetaRecord {
    n: usize,
    d_max: Exact,
    gamma_e: usize,
    gamma_v: usize,
    horizon: usize,
    seed: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRecord {
    id: usize,
    cost: Exact,
    dev: Exact,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeRecord {
    u: usize,
    v: usize,
    len: Exact,
    dev: Exact,
    period_caps: Vec<Exact>,
}

/// Deserialises `T` from JSON, mapping failures to [`Error::Parse`] with the
/// offending field path in the message.
pub fn parse_json<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|err| {
        let path = err.path().to_string();
        let inner = err.into_inner();
        Error::Parse {
            line: inner.line(),
            column: inner.column(),
            message: if path == "." {
                inner.to_string()
            } else {
                format!("{path}: {inner}")
            },
        }
    })?;
    de.end().map_err(|err| Error::Parse {
        line: err.line(),
        column: err.column(),
        message: err.to_string(),
    })?;
    Ok(value)
}

pub fn load_instance(bytes: &[u8]) -> Result<NetworkInstance> {
    let text = std::str::from_utf8(bytes).map_err(|err| Error::Parse {
        line: 0,
        column: 0,
        message: format!("not UTF-8: {err}"),
    })?;
    let file: InstanceFile = parse_json(text)?;
    if file.meta.n != file.nodes.len() {
        return Err(Error::validation(
            "meta.n",
            format!(
                "declares {} nodes but {} are listed",
                file.meta.n,
                file.nodes.len()
            ),
        ));
    }
    let nodes = file
        .nodes
        .into_iter()
        .map(|r| NodeData {
            id: r.id,
            nominal_cost: r.cost.0,
            max_deviation: r.dev.0,
        })
        .collect();
    let edges = file
        .edges
        .into_iter()
        .map(|r| EdgeData {
            u: r.u,
            v: r.v,
            nominal_length: r.len.0,
            max_deviation: r.dev.0,
            period_caps: r.period_caps.into_iter().map(|c| c.0).collect(),
        })
        .collect();
    NetworkInstance::new(
        nodes,
        edges,
        file.meta.d_max.0,
        file.meta.gamma_e,
        file.meta.gamma_v,
        file.meta.horizon,
        file.meta.seed,
    )
}

/// Canonical serialisation: pretty JSON, edges sorted with `u < v`, exact
/// rationals, trailing newline.
pub fn save_instance(inst: &NetworkInstance) -> Vec<u8> {
    let file = InstanceFile {
        meta: MetaRecord {
            n: inst.n(),
            d_max: Exact(inst.d_max().clone()),
            gamma_e: inst.gamma_e(),
            gamma_v: inst.gamma_v(),
            horizon: inst.horizon(),
            seed: inst.seed(),
        },
        nodes: inst
            .nodes()
            .iter()
            .map(|n| NodeRecord {
                id: n.id,
                cost: Exact(n.nominal_cost.clone()),
                dev: Exact(n.max_deviation.clone()),
            })
            .collect(),
        edges: inst
            .edges()
            .iter()
            .map(|e| EdgeRecord {
                u: e.u,
                v: e.v,
                len: Exact(e.nominal_length.clone()),
                dev: Exact(e.max_deviation.clone()),
                period_caps: e.period_caps.iter().cloned().map(Exact).collect(),
            })
            .collect(),
    };
    let mut bytes = serde_json::to_vec_pretty(&file).expect("instance serialises");
    bytes.push(b'\n');
    bytes
}
