//! One record per check with the usual benchmark columns:
//! time to build the diagrams, total time, final and peak node counts.

use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;

use crate::bench::BenchmarkPair;
use crate::circuit::{CircuitSpec, Mode, Verdict, Witness};
use crate::encoding::{representation_nodes, PlanMode};
use crate::equivalence::{check, CheckConfig};
use crate::oracle;

/// Field order is the JSON key order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub benchmark: String,
    pub mode: String,
    pub plan: String,
    pub verdict: String,
    /// Seconds, rounded to 0.01.
    pub tdd_time: f64,
    pub time: f64,
    /// Nodes of the conventional circuit's TDD when it has one, otherwise
    /// of the first circuit's final diagram.
    pub nodes: Option<usize>,
    pub m_nodes: usize,
    pub partitions: usize,
    pub discarded: usize,
    pub witness: Option<Witness>,
    pub reason: Option<String>,
}

pub fn plan_label(p: PlanMode) -> &'static str {
    match p {
        PlanMode::Sequential => "basic",
        PlanMode::PerQubit => "partitioned",
    }
}

pub fn mode_label(m: Mode) -> &'static str {
    match m {
        Mode::M => "m",
        Mode::Q => "q",
    }
}

fn centi(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

impl Report {
    fn failed(name: &str, mode: &str, plan: &str, reason: String) -> Report {
        Report {
            benchmark: name.to_owned(),
            mode: mode.to_owned(),
            plan: plan.to_owned(),
            verdict: "Inconclusive".into(),
            tdd_time: 0.0,
            time: 0.0,
            nodes: None,
            m_nodes: 0,
            partitions: 0,
            discarded: 0,
            witness: None,
            reason: Some(reason),
        }
    }

    pub fn verdict_is(&self, label: &str) -> bool {
        self.verdict == label
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Runs the TDD checker on two specs and reports the result. Errors become
/// an `Inconclusive` record with the reason.
pub fn run_check(name: &str, a: &CircuitSpec, b: &CircuitSpec, cfg: &CheckConfig) -> Report {
    let mode = mode_label(cfg.mode);
    let plan = plan_label(cfg.plan);
    let outcome = match check(a, b, cfg) {
        Ok(o) => o,
        Err(e) => return Report::failed(name, mode, plan, e.to_string()),
    };
    let nodes = match representation_nodes(a) {
        Ok(Some(n)) => Some(n),
        _ => outcome.stats.final_nodes_a,
    };
    let (witness, reason) = match &outcome.verdict {
        Verdict::Equivalent => (None, None),
        Verdict::NotEquivalent { witness } => (Some(witness.clone()), None),
        Verdict::Inconclusive { reason } => (None, Some(reason.clone())),
    };
    Report {
        benchmark: name.to_owned(),
        mode: mode.into(),
        plan: plan.into(),
        verdict: outcome.verdict.label().into(),
        tdd_time: centi(outcome.stats.tdd_time),
        time: centi(outcome.stats.total_time),
        nodes,
        m_nodes: outcome.stats.max_nodes,
        partitions: outcome.stats.partitions,
        discarded: outcome.stats.discarded,
        witness,
        reason,
    }
}

/// Compares the summed channels with the dense oracle.
pub fn run_full(name: &str, a: &CircuitSpec, b: &CircuitSpec) -> Report {
    let start = Instant::now();
    match oracle::oracle_full_eq(a, b) {
        Ok(eq) => Report {
            benchmark: name.to_owned(),
            mode: "full".into(),
            plan: "oracle".into(),
            verdict: if eq { "Equivalent" } else { "NotEquivalent" }.into(),
            tdd_time: 0.0,
            time: centi(start.elapsed().as_secs_f64()),
            nodes: None,
            m_nodes: 0,
            partitions: 0,
            discarded: 0,
            witness: None,
            reason: None,
        },
        Err(e) => Report::failed(name, "full", "oracle", e.to_string()),
    }
}

pub fn run_pair(pair: &BenchmarkPair, plan: PlanMode) -> Report {
    run_check(
        &pair.name,
        &pair.spec_a,
        &pair.spec_b,
        &CheckConfig::new(pair.mode, plan),
    )
}

/// Human-readable table of reports.
pub fn table(rows: &[Report]) -> String {
    let mut out = format!(
        "{:<16} {:<4} {:<11} {:<14} {:>11} {:>9} {:>8} {:>8}\n",
        "benchmark", "mode", "plan", "verdict", "tdd_time(s)", "time(s)", "nodes", "m_nodes"
    );
    for r in rows {
        let nodes = r.nodes.map_or_else(|| "-".to_owned(), |n| n.to_string());
        let _ = writeln!(
            out,
            "{:<16} {:<4} {:<11} {:<14} {:>11.2} {:>9.2} {:>8} {:>8}",
            r.benchmark, r.mode, r.plan, r.verdict, r.tdd_time, r.time, nodes, r.m_nodes
        );
    }
    out
}
