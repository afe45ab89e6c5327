//! Dominator-based natural-loop identification and the bounded-cycle check.

use std::collections::BTreeSet;

use crate::program::{BlockId, Cfg};
use crate::{IrError, Result};

/// Immediate reachability-style dominator sets (iterative, fine at this scale).
fn dominators(cfg: &Cfg) -> Vec<BTreeSet<BlockId>> {
    let n = cfg.blocks.len();
    let all: BTreeSet<BlockId> = (0..n as u32).map(BlockId).collect();
    let mut dom: Vec<BTreeSet<BlockId>> = vec![all; n];
    dom[cfg.entry.index()] = BTreeSet::from([cfg.entry]);
    let mut changed = true;
    while changed {
        changed = false;
        for b in 0..n as u32 {
            let b = BlockId(b);
            if b == cfg.entry {
                continue;
            }
            let mut next: Option<BTreeSet<BlockId>> = None;
            for p in cfg.predecessors(b) {
                next = Some(match next {
                    None => dom[p.index()].clone(),
                    Some(acc) => acc.intersection(&dom[p.index()]).copied().collect(),
                });
            }
            let mut next = next.unwrap_or_default();
            next.insert(b);
            if next != dom[b.index()] {
                dom[b.index()] = next;
                changed = true;
            }
        }
    }
    dom
}

/// Edges `tail -> header` where the header dominates the tail.
pub fn back_edges(cfg: &Cfg) -> Vec<(BlockId, BlockId)> {
    let dom = dominators(cfg);
    cfg.edges
        .iter()
        .copied()
        .filter(|&(tail, header)| dom[tail.index()].contains(&header))
        .collect()
}

/// Blocks of the natural loop of `header`: the header plus everything that
/// reaches a back edge tail without passing through the header.
pub fn natural_loop(cfg: &Cfg, header: BlockId) -> BTreeSet<BlockId> {
    let mut body = BTreeSet::from([header]);
    let tails: Vec<BlockId> = back_edges(cfg)
        .into_iter()
        .filter(|&(_, h)| h == header)
        .map(|(t, _)| t)
        .collect();
    let mut stack = tails;
    while let Some(b) = stack.pop() {
        if body.insert(b) {
            stack.extend(cfg.predecessors(b));
        }
    }
    body
}

/// Every back edge must target a bounded header, and removing those edges
/// must leave an acyclic graph; otherwise some cycle is unbounded.
pub fn check_bounded_cycles(cfg: &Cfg) -> Result<()> {
    let back: Vec<(BlockId, BlockId)> = back_edges(cfg);
    for &(tail, header) in &back {
        if !cfg.loop_bounds.contains_key(&header) {
            return Err(IrError::invalid(
                format!(
                    "edge {} -> {}",
                    cfg.block(tail).name,
                    cfg.block(header).name
                ),
                "unbounded cycle: loop header has no bound",
            ));
        }
    }
    // Kahn's algorithm on the graph without back edges.
    let n = cfg.blocks.len();
    let forward: Vec<(BlockId, BlockId)> = cfg
        .edges
        .iter()
        .copied()
        .filter(|e| !back.contains(e))
        .collect();
    let mut indeg = vec![0usize; n];
    for &(_, d) in &forward {
        indeg[d.index()] += 1;
    }
    let mut queue: Vec<BlockId> = (0..n as u32)
        .map(BlockId)
        .filter(|b| indeg[b.index()] == 0)
        .collect();
    let mut seen = 0;
    while let Some(b) = queue.pop() {
        seen += 1;
        for &(s, d) in &forward {
            if s == b {
                indeg[d.index()] -= 1;
                if indeg[d.index()] == 0 {
                    queue.push(d);
                }
            }
        }
    }
    if seen != n {
        return Err(IrError::invalid(
            "cfg",
            "unbounded cycle: a cycle avoids every bounded loop header",
        ));
    }
    Ok(())
}

/// A topological order of the graph without back edges.
pub fn forward_topo_order(cfg: &Cfg) -> Vec<BlockId> {
    let back = back_edges(cfg);
    let n = cfg.blocks.len();
    let forward: Vec<(BlockId, BlockId)> = cfg
        .edges
        .iter()
        .copied()
        .filter(|e| !back.contains(e))
        .collect();
    let mut indeg = vec![0usize; n];
    for &(_, d) in &forward {
        indeg[d.index()] += 1;
    }
    let mut ready: BTreeSet<BlockId> = (0..n as u32)
        .map(BlockId)
        .filter(|b| indeg[b.index()] == 0)
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some(&b) = ready.iter().next() {
        ready.remove(&b);
        order.push(b);
        for &(s, d) in &forward {
            if s == b {
                indeg[d.index()] -= 1;
                if indeg[d.index()] == 0 {
                    ready.insert(d);
                }
            }
        }
    }
    order
}
