//! Execution-graph solving: the start of a vertex is the earliest time all
//! incoming dependencies are satisfied; its end is the start plus its
//! latency. Solid edges (`delta = 1`) depend on the source's end, dotted
//! ones (`delta = 0`) on its start. Sourceless dependencies are available at
//! time zero.

use crate::{OracleError, Result};

#[derive(Copy, Clone, Debug)]
pub struct XgVertex {
    pub latency: i64,
}

#[derive(Copy, Clone, Debug)]
pub struct XgEdge {
    pub from: usize,
    pub to: usize,
    /// 1: `to` starts after the end of `from`; 0: after its start.
    pub delta: u8,
}

#[derive(Clone, Debug, Default)]
pub struct ScalarXg {
    pub vertices: Vec<XgVertex>,
    pub edges: Vec<XgEdge>,
}

/// Topological evaluation; returns (start, end) per vertex.
pub fn solve_xg(g: &ScalarXg) -> Result<Vec<(i64, i64)>> {
    let n = g.vertices.len();
    let mut indeg = vec![0usize; n];
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (ei, e) in g.edges.iter().enumerate() {
        indeg[e.to] += 1;
        out[e.from].push(ei);
    }
    let mut ready: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut start = vec![0i64; n];
    let mut solved = 0;
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop() {
        order.push(v);
        solved += 1;
        for &ei in &out[v] {
            indeg[g.edges[ei].to] -= 1;
            if indeg[g.edges[ei].to] == 0 {
                ready.push(g.edges[ei].to);
            }
        }
    }
    if solved != n {
        return Err(OracleError::Cyclic);
    }
    // Incoming-max in topological order.
    let mut incoming: Vec<Vec<&XgEdge>> = vec![Vec::new(); n];
    for e in &g.edges {
        incoming[e.to].push(e);
    }
    for &v in &order {
        let mut t = 0i64;
        for e in &incoming[v] {
            let dep = start[e.from]
                + if e.delta == 1 {
                    g.vertices[e.from].latency
                } else {
                    0
                };
            t = t.max(dep);
        }
        start[v] = t;
    }
    Ok(start
        .iter()
        .enumerate()
        .map(|(v, &s)| (s, s + g.vertices[v].latency))
        .collect())
}
