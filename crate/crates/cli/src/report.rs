//! Human and machine reports over an analysis result. Both renderings are
//! byte-stable for fixed inputs and flags.

use std::collections::BTreeMap;

use cfg_analysis::{Analysis, Analyzer};
use serde::Serialize;
use timing_ir::BlockId;

pub const REPORT_SCHEMA: &str = "xdta-report/1";

#[derive(Serialize)]
pub struct BlockReport {
    pub name: String,
    pub in_states: usize,
    pub out_states: usize,
    pub worst_case: i64,
    pub pessimized: bool,
    pub times: Vec<String>,
}

#[derive(Serialize)]
pub struct EdgeReport {
    pub from: String,
    pub to: String,
    pub states: usize,
}

#[derive(Serialize)]
pub struct EventReport {
    pub name: String,
    pub lifetime_instructions: u64,
}

#[derive(Serialize)]
pub struct Report {
    pub schema: String,
    pub pipeline: String,
    pub program: String,
    pub exact: bool,
    pub iterations: usize,
    pub blocks: Vec<BlockReport>,
    pub edges: Vec<EdgeReport>,
    pub events: Vec<EventReport>,
    /// Longest-path WCET for acyclic programs.
    pub wcet: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_check: Option<String>,
}

pub fn build_report(
    analyzer: &Analyzer<'_>,
    analysis: &Analysis,
    times: &BTreeMap<BlockId, i64>,
    wcet: Option<i64>,
    oracle_check: Option<String>,
) -> Report {
    let cfg = analyzer.cfg;
    let blocks = cfg
        .blocks
        .iter()
        .map(|b| {
            let outcome = &analysis.per_block[&b.id];
            BlockReport {
                name: b.name.clone(),
                in_states: outcome.input.len(),
                out_states: outcome.output.len(),
                worst_case: times[&b.id],
                pessimized: outcome.timing.pessimized,
                times: outcome
                    .timing
                    .times
                    .iter()
                    .map(|&t| analyzer.store.compact(t))
                    .collect(),
            }
        })
        .collect();
    let edges = cfg
        .edges
        .iter()
        .map(|&(s, d)| EdgeReport {
            from: cfg.block(s).name.clone(),
            to: cfg.block(d).name.clone(),
            states: analysis.edge_states[&(s, d)],
        })
        .collect();
    let events = analysis
        .event_lifetimes
        .iter()
        .map(|(name, &lifetime)| EventReport {
            name: name.clone(),
            lifetime_instructions: lifetime,
        })
        .collect();
    Report {
        schema: REPORT_SCHEMA.to_string(),
        pipeline: analyzer.spec.name.clone(),
        program: cfg.name.clone(),
        exact: !analysis.pessimized,
        iterations: analysis.iterations,
        blocks,
        edges,
        events,
        wcet,
        oracle_check,
    }
}

/// The structured-text rendering.
pub fn render_text(analyzer: &Analyzer<'_>, analysis: &Analysis, report: &Report) -> String {
    let mut out = String::new();
    out.push_str("xdta report v1\n");
    out.push_str(&format!("pipeline: {}\n", report.pipeline));
    out.push_str(&format!("program: {}\n", report.program));
    out.push_str(&format!(
        "status: {}\n",
        if report.exact { "exact" } else { "pessimized" }
    ));
    out.push_str(&format!("worklist iterations: {}\n", report.iterations));
    for b in &report.blocks {
        out.push_str(&format!("\nblock {}\n", b.name));
        out.push_str(&format!("  in-states: {}\n", b.in_states));
        out.push_str(&format!("  out-states: {}\n", b.out_states));
        out.push_str(&format!("  worst-case delay: {}\n", b.worst_case));
        if b.pessimized {
            out.push_str("  pessimized: yes\n");
        }
        let block_id = analyzer
            .cfg
            .blocks
            .iter()
            .find(|blk| blk.name == b.name)
            .map(|blk| blk.id)
            .expect("report block exists");
        for (i, &t) in analysis.per_block[&block_id].timing.times.iter().enumerate() {
            out.push_str(&format!("  time[{i}]:\n"));
            for line in analyzer.store.text(t).lines() {
                out.push_str("    ");
                out.push_str(line);
                out.push('\n');
            }
        }
    }
    if !report.edges.is_empty() {
        out.push('\n');
        for e in &report.edges {
            out.push_str(&format!("edge {} -> {}: {} state(s)\n", e.from, e.to, e.states));
        }
    }
    if !report.events.is_empty() {
        out.push('\n');
        for e in &report.events {
            out.push_str(&format!(
                "event {}: lifetime {} instruction(s)\n",
                e.name, e.lifetime_instructions
            ));
        }
    }
    if !analyzer.traces.is_empty() {
        out.push_str("\ncontention traces\n");
        for (block, trace) in &analyzer.traces {
            out.push_str(&format!("  window in {}\n", analyzer.cfg.block(*block).name));
            for (label, what, diagram) in &trace.entries {
                out.push_str(&format!("    {label} {what} = {diagram}\n"));
            }
        }
    }
    out.push('\n');
    match report.wcet {
        Some(w) => out.push_str(&format!("wcet (acyclic longest path): {w}\n")),
        None => out.push_str("wcet: bounded loops present, solve the emitted ILP\n"),
    }
    if let Some(check) = &report.oracle_check {
        out.push_str(&format!("oracle check: {check}\n"));
    }
    out
}

pub fn render_json(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}
