//! Implicit path enumeration: emits the integer linear program whose optimum
//! is the program WCET, and solves the acyclic case directly.
//!
//! The file follows the LP format: an objective line, named constraint rows,
//! a (possibly empty) bounds section, integer declarations, `End`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use timing_ir::{loops, BlockId, Cfg};

/// LP-safe variable name for a block.
fn block_var(cfg: &Cfg, b: BlockId) -> String {
    format!("x_{}", sanitize(&cfg.block(b).name))
}

fn edge_var(cfg: &Cfg, e: (BlockId, BlockId)) -> String {
    format!(
        "e_{}_{}",
        sanitize(&cfg.block(e.0).name),
        sanitize(&cfg.block(e.1).name)
    )
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect()
}

/// Renders the ILP document. `times` maps every block to its worst-case
/// delay in cycles.
pub fn emit_ipet(cfg: &Cfg, times: &BTreeMap<BlockId, i64>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ path enumeration for {}", cfg.name);
    out.push_str("Maximize\n obj:");
    for (i, b) in cfg.blocks.iter().enumerate() {
        let t = times[&b.id];
        let _ = write!(out, "{} {} {}", if i == 0 { "" } else { " +" }, t, block_var(cfg, b.id));
    }
    out.push_str("\nSubject To\n");
    for b in &cfg.blocks {
        if b.id != cfg.entry {
            let _ = write!(out, " in_{}:", sanitize(&b.name));
            for (i, p) in cfg.predecessors(b.id).enumerate() {
                let _ = write!(
                    out,
                    "{} {}",
                    if i == 0 { "" } else { " +" },
                    edge_var(cfg, (p, b.id))
                );
            }
            let _ = writeln!(out, " - {} = 0", block_var(cfg, b.id));
        }
        if b.id != cfg.exit {
            let _ = write!(out, " out_{}:", sanitize(&b.name));
            for (i, s) in cfg.successors(b.id).enumerate() {
                let _ = write!(
                    out,
                    "{} {}",
                    if i == 0 { "" } else { " +" },
                    edge_var(cfg, (b.id, s))
                );
            }
            let _ = writeln!(out, " - {} = 0", block_var(cfg, b.id));
        }
    }
    let _ = writeln!(out, " entry: {} = 1", block_var(cfg, cfg.entry));
    let _ = writeln!(out, " exit: {} = 1", block_var(cfg, cfg.exit));
    for (&header, &bound) in &cfg.loop_bounds {
        let body = loops::natural_loop(cfg, header);
        let _ = write!(out, " loop_{}: {}", sanitize(&cfg.block(header).name), block_var(cfg, header));
        for p in cfg.predecessors(header) {
            if !body.contains(&p) {
                let _ = write!(out, " - {} {}", bound, edge_var(cfg, (p, header)));
            }
        }
        out.push_str(" <= 0\n");
    }
    out.push_str("Bounds\n");
    out.push_str("General\n");
    for b in &cfg.blocks {
        let _ = writeln!(out, " {}", block_var(cfg, b.id));
    }
    for &e in &cfg.edges {
        let _ = writeln!(out, " {}", edge_var(cfg, e));
    }
    out.push_str("End\n");
    out
}

/// Longest entry-to-exit path of an acyclic program: the exact WCET without
/// an external solver. `None` when the program has loops.
pub fn acyclic_wcet(cfg: &Cfg, times: &BTreeMap<BlockId, i64>) -> Option<i64> {
    if !loops::back_edges(cfg).is_empty() {
        return None;
    }
    let order = loops::forward_topo_order(cfg);
    let mut best: BTreeMap<BlockId, i64> = BTreeMap::new();
    for &b in &order {
        let from_preds = cfg
            .predecessors(b)
            .filter_map(|p| best.get(&p).copied())
            .max();
        let base = if b == cfg.entry {
            Some(0)
        } else {
            from_preds
        };
        if let Some(v) = base {
            best.insert(b, v + times[&b]);
        }
    }
    best.get(&cfg.exit).copied()
}

/// Minimal self-check parser of the emitted grammar: section headers in
/// order, each constraint shaped `name: terms (=|<=|>=) number`.
pub fn parse_lp(text: &str) -> Result<LpDocument, String> {
    let mut lines = text.lines().peekable();
    let mut doc = LpDocument::default();
    while let Some(l) = lines.peek() {
        if l.starts_with('\\') {
            lines.next();
        } else {
            break;
        }
    }
    if lines.next() != Some("Maximize") {
        return Err("missing Maximize".into());
    }
    let obj = lines.next().ok_or("missing objective")?;
    let obj = obj.trim();
    let body = obj.strip_prefix("obj:").ok_or("objective must be named obj")?;
    for term in body.split('+') {
        let mut parts = term.split_whitespace();
        let coeff: i64 = parts
            .next()
            .ok_or("empty objective term")?
            .parse()
            .map_err(|_| "bad coefficient")?;
        let var = parts.next().ok_or("term without variable")?.to_string();
        if parts.next().is_some() {
            return Err("trailing tokens in term".into());
        }
        doc.objective.push((coeff, var));
    }
    if lines.next() != Some("Subject To") {
        return Err("missing Subject To".into());
    }
    for line in lines.by_ref() {
        if line == "Bounds" {
            break;
        }
        let line = line.trim();
        let (name, rest) = line.split_once(':').ok_or("constraint without name")?;
        let rel = if rest.contains("<=") {
            "<="
        } else if rest.contains(">=") {
            ">="
        } else if rest.contains('=') {
            "="
        } else {
            return Err(format!("constraint {name} has no relation"));
        };
        let (_lhs, rhs) = rest.split_once(rel).unwrap();
        let rhs: i64 = rhs.trim().parse().map_err(|_| "non-numeric rhs")?;
        doc.constraints.push((name.trim().to_string(), rhs));
    }
    if lines.next() != Some("General") {
        return Err("missing General".into());
    }
    for line in lines.by_ref() {
        if line == "End" {
            doc.ended = true;
            break;
        }
        doc.integers.push(line.trim().to_string());
    }
    if !doc.ended {
        return Err("missing End".into());
    }
    Ok(doc)
}

#[derive(Default, Debug)]
pub struct LpDocument {
    pub objective: Vec<(i64, String)>,
    pub constraints: Vec<(String, i64)>,
    pub integers: Vec<String>,
    pub ended: bool,
}
