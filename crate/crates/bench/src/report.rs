//! JSON views of solver output.

use regenloc::io::Exact;
use regenloc::methods::{SolveReport, TraceRow};
use regenloc::paths::TransformedGraph;
use regenloc::rational::{format_rational, to_f64};
use regenloc::Rational;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct ReportJson {
    pub method: String,
    pub objective: Exact,
    pub objective_approx: f64,
    pub placement: Vec<usize>,
    pub iterations: usize,
    pub lower_bound: Exact,
    pub upper_bound: Exact,
    pub gap: Exact,
    pub scenarios_or_cuts: usize,
    pub converged: bool,
    pub wall_time_ms: f64,
    pub trace: Vec<TraceJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deviations: Option<Vec<Vec<Exact>>>,
}

#[derive(Debug, Serialize)]
pub struct TraceJson {
    pub iteration: usize,
    pub value: Exact,
    pub lower_bound: Exact,
    pub upper_bound: Exact,
    pub placement: Vec<usize>,
    pub placement_hash: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub changes: Vec<String>,
}

fn exact(r: &Rational) -> Exact {
    Exact(r.clone())
}

/// `t:e:from->to`, one per changed deviation.
pub fn change_text(row: &TraceRow) -> Vec<String> {
    row.changes
        .iter()
        .map(|c| {
            format!(
                "{}:{}:{}->{}",
                c.period,
                c.edge,
                format_rational(&c.from),
                format_rational(&c.to)
            )
        })
        .collect()
}

impl From<&SolveReport> for ReportJson {
    fn from(r: &SolveReport) -> Self {
        ReportJson {
            method: r.method.name().to_string(),
            objective: exact(&r.objective),
            objective_approx: to_f64(&r.objective),
            placement: r.placement.selected.ids(),
            iterations: r.iterations,
            lower_bound: exact(&r.lower_bound),
            upper_bound: exact(&r.upper_bound),
            gap: exact(&r.gap),
            scenarios_or_cuts: r.scenarios_or_cuts,
            converged: r.converged,
            wall_time_ms: r.wall_time.as_secs_f64() * 1e3,
            trace: r
                .trace
                .iter()
                .map(|t| TraceJson {
                    iteration: t.iteration,
                    value: exact(&t.value),
                    lower_bound: exact(&t.lower_bound),
                    upper_bound: exact(&t.upper_bound),
                    placement: t.placement.ids(),
                    placement_hash: format!("{:016x}", t.placement_hash),
                    changes: change_text(t),
                })
                .collect(),
            deviations: r.deviations.as_ref().map(|table| {
                table
                    .iter()
                    .map(|row| row.iter().map(exact).collect())
                    .collect()
            }),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct GraphJson {
    pub regime: String,
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub ndc_pairs: Vec<(usize, usize)>,
}

impl GraphJson {
    pub fn new(regime: &str, m: &TransformedGraph) -> Self {
        GraphJson {
            regime: regime.to_string(),
            n: m.n(),
            edges: m.edges(),
            ndc_pairs: m.ndc_pairs(),
        }
    }
}

pub fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("plain data serialises");
    text.push('\n');
    text
}
