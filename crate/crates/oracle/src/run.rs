//! Path x configuration ground truth: unrolls the control flow to complete
//! paths, builds the execution graph of each path's instruction stream, and
//! solves it with bus-contention windows resolved by the scalar simulator.

use std::collections::BTreeMap;

use timing_ir::{loops, AccessKind, BlockId, Cfg, Classification, InstrClass, PipelineSpec};

use crate::bus::{simulate_contention, ContentionInput, FeRequest};
use crate::xg::{ScalarXg, XgEdge, XgVertex};
use crate::{OracleError, Result, Time};

/// One dynamic instruction of an unrolled path.
#[derive(Clone, Debug)]
struct DynInstr {
    /// Position of the owning block instance along the path.
    step: usize,
    class: InstrClass,
    reads: Vec<u8>,
    writes: Vec<u8>,
    fetch: Classification,
    data: Option<Classification>,
}

/// One dynamic not-classified access: the unit of the configuration space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DynAccess {
    pub block: BlockId,
    pub instr: usize,
    pub kind: AccessKind,
    /// Dynamic instruction index along the path.
    pub dyn_index: usize,
    /// Generation this occurrence carries at the end of the path: the number
    /// of times its loop restarted after it executed.
    pub final_generation: u32,
}

/// A complete path with its dynamic accesses.
#[derive(Clone, Debug)]
pub struct PathInfo {
    pub blocks: Vec<BlockId>,
    pub accesses: Vec<DynAccess>,
}

#[derive(Clone, Debug)]
pub struct Enumeration {
    pub paths: Vec<PathInfo>,
}

/// Enumeration guard from the design notes.
pub const MAX_PAIRS: u64 = 1 << 14;

/// All complete entry-to-exit paths, each loop header executing at most its
/// bound times per path.
pub fn enumerate_paths(cfg: &Cfg) -> Vec<Vec<BlockId>> {
    let mut out = Vec::new();
    let mut path = vec![cfg.entry];
    let mut counts: BTreeMap<BlockId, u32> = BTreeMap::new();
    counts.insert(cfg.entry, 1);
    dfs(cfg, &mut path, &mut counts, &mut out);
    out
}

fn dfs(
    cfg: &Cfg,
    path: &mut Vec<BlockId>,
    counts: &mut BTreeMap<BlockId, u32>,
    out: &mut Vec<Vec<BlockId>>,
) {
    let cur = *path.last().unwrap();
    if cur == cfg.exit {
        out.push(path.clone());
        return;
    }
    let mut succs: Vec<BlockId> = cfg.successors(cur).collect();
    succs.sort();
    for succ in succs {
        let seen = counts.get(&succ).copied().unwrap_or(0);
        let cap = cfg.loop_bounds.get(&succ).copied().unwrap_or(1);
        if seen >= cap {
            continue;
        }
        *counts.entry(succ).or_insert(0) += 1;
        path.push(succ);
        dfs(cfg, path, counts, out);
        path.pop();
        *counts.get_mut(&succ).unwrap() -= 1;
    }
}

fn unroll(cfg: &Cfg, path: &[BlockId]) -> (Vec<DynInstr>, Vec<DynAccess>) {
    let mut seq: Vec<DynInstr> = Vec::new();
    let mut accesses = Vec::new();
    for (step, &b) in path.iter().enumerate() {
        for (i, instr) in cfg.block(b).instrs.iter().enumerate() {
            let dyn_index = seq.len();
            if instr.fetch == Classification::NotClassified {
                accesses.push(DynAccess {
                    block: b,
                    instr: i,
                    kind: AccessKind::Fetch,
                    dyn_index,
                    final_generation: 0,
                });
            }
            if instr.data == Some(Classification::NotClassified) {
                accesses.push(DynAccess {
                    block: b,
                    instr: i,
                    kind: AccessKind::Data,
                    dyn_index,
                    final_generation: 0,
                });
            }
            seq.push(DynInstr {
                step,
                class: instr.class,
                reads: instr.reads.iter().copied().collect(),
                writes: instr.writes.iter().copied().collect(),
                fetch: instr.fetch,
                data: instr.data,
            });
        }
    }
    // Final generations: one bump per later back-edge traversal of the
    // access's loop.
    let back = loops::back_edges(cfg);
    for w in 0..path.len().saturating_sub(1) {
        let edge = (path[w], path[w + 1]);
        if !back.contains(&edge) {
            continue;
        }
        let body = loops::natural_loop(cfg, edge.1);
        for acc in accesses.iter_mut() {
            if seq[acc.dyn_index].step <= w && body.contains(&acc.block) {
                acc.final_generation += 1;
            }
        }
    }
    (seq, accesses)
}

/// Enumerates paths and accesses, enforcing the size guard.
pub fn enumerate(cfg: &Cfg) -> Result<Enumeration> {
    let blocks_paths = enumerate_paths(cfg);
    let mut paths = Vec::new();
    let mut pairs: u64 = 0;
    for p in blocks_paths {
        let (_, accesses) = unroll(cfg, &p);
        pairs = pairs.saturating_add(1u64 << accesses.len().min(63));
        if pairs > MAX_PAIRS {
            return Err(OracleError::GuardExceeded {
                pairs,
                limit: MAX_PAIRS,
            });
        }
        paths.push(PathInfo {
            blocks: p,
            accesses,
        });
    }
    Ok(Enumeration { paths })
}

// ---- execution-graph construction -----------------------------------------

/// Order domain of an instruction at the execute stage: the unit it runs on,
/// or the whole stage when no units are configured.
fn exec_domain(spec: &PipelineSpec, class: InstrClass) -> usize {
    spec.unit_for(class).map(|(i, _)| i).unwrap_or(usize::MAX)
}

fn vertex(num_stages: usize, d: usize, s: usize) -> usize {
    d * num_stages + s
}

struct SeqGraph {
    graph: ScalarXg,
    num_stages: usize,
}

/// Builds the dependency edges of a dynamic instruction sequence under one
/// configuration (the configuration only fixes latencies).
fn build_graph(
    spec: &PipelineSpec,
    seq: &[DynInstr],
    gamma: &dyn Fn(usize, AccessKind) -> bool,
) -> SeqGraph {
    let ns = spec.stages.len();
    let exec = spec.execute_stage();
    let mem = spec.memory_stage();
    let fetch = spec.fetch_stage();
    let per_unit = !spec.units.is_empty();

    let mut vertices = Vec::with_capacity(seq.len() * ns);
    for (d, di) in seq.iter().enumerate() {
        for (s, stage) in spec.stages.iter().enumerate() {
            let latency = if s == fetch {
                match di.fetch {
                    Classification::AlwaysHit => stage.latency,
                    Classification::AlwaysMiss => spec.miss_latency,
                    Classification::NotClassified => {
                        if gamma(d, AccessKind::Fetch) {
                            spec.miss_latency
                        } else {
                            stage.latency
                        }
                    }
                }
            } else if s == mem && di.class.uses_memory() {
                let hit = spec.class_latency(di.class);
                match di.data.expect("memory instruction") {
                    Classification::AlwaysHit => hit,
                    Classification::AlwaysMiss => spec.miss_latency,
                    Classification::NotClassified => {
                        if gamma(d, AccessKind::Data) {
                            spec.miss_latency
                        } else {
                            hit
                        }
                    }
                }
            } else if s == exec {
                spec.class_latency(di.class)
            } else {
                stage.latency
            };
            vertices.push(XgVertex {
                latency: latency as i64,
            });
        }
    }

    let mut edges = Vec::new();
    let mut push = |from: usize, to: usize, delta: u8| edges.push(XgEdge { from, to, delta });
    for (d, di) in seq.iter().enumerate() {
        for s in 0..ns {
            let to = vertex(ns, d, s);
            // Program and capacity order, per unit at a unit-dispatch stage.
            let (prev_same, width) = if s == exec && per_unit {
                let dom = exec_domain(spec, di.class);
                let prevs: Vec<usize> = (0..d)
                    .rev()
                    .filter(|&p| exec_domain(spec, seq[p].class) == dom)
                    .collect();
                let count = spec
                    .unit_for(di.class)
                    .map(|(_, u)| u.count as usize)
                    .unwrap_or(1);
                (prevs, count)
            } else {
                ((0..d).rev().collect(), spec.stages[s].width as usize)
            };
            if let Some(&p) = prev_same.first() {
                push(vertex(ns, p, s), to, 0);
            }
            if prev_same.len() >= width {
                push(vertex(ns, prev_same[width - 1], s), to, 1);
            }
            // Pipeline order.
            if s > 0 {
                push(vertex(ns, d, s - 1), to, 1);
            }
            // Queue towards the next stage: wait for the instruction
            // `capacity` back to have entered it.
            if let Some(q) = spec.queue_after(s) {
                let c = q.capacity as usize;
                if d >= c {
                    push(vertex(ns, d - c, s + 1), to, 0);
                }
            }
            // Fetch order: the last instruction that brought a block from
            // memory.
            if s == fetch {
                if let Some(p) = (0..d).rev().find(|&p| seq[p].fetch.may_use_bus()) {
                    push(vertex(ns, p, fetch), to, 1);
                }
            }
            // Memory order: loads and stores are performed in order.
            if s == mem && di.class.uses_memory() {
                for wanted in [InstrClass::Load, InstrClass::Store] {
                    if let Some(p) = (0..d).rev().find(|&p| seq[p].class == wanted) {
                        push(vertex(ns, p, mem), to, 1);
                    }
                }
            }
            // Data dependencies, read at the execute stage.
            if s == exec {
                for &r in &di.reads {
                    if let Some(p) = (0..d).rev().find(|&p| seq[p].writes.contains(&r)) {
                        let produce = if seq[p].class == InstrClass::Load {
                            mem
                        } else {
                            exec
                        };
                        push(vertex(ns, p, produce), to, 1);
                    }
                }
            }
        }
    }

    SeqGraph {
        graph: ScalarXg { vertices, edges },
        num_stages: ns,
    }
}

/// Evaluates the graph with per-vertex start floors (bus adjustments):
/// `start = max(0, deps, floor)`.
fn solve_floored(g: &ScalarXg, floors: &BTreeMap<usize, i64>) -> Vec<(i64, i64)> {
    let n = g.vertices.len();
    let mut incoming: Vec<Vec<&XgEdge>> = vec![Vec::new(); n];
    for e in &g.edges {
        incoming[e.to].push(e);
    }
    let mut start = vec![0i64; n];
    // Vertices are already indexed in evaluation order and edges only point
    // forward.
    for v in 0..n {
        let mut t = floors.get(&v).copied().unwrap_or(0).max(0);
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
    start
        .iter()
        .enumerate()
        .map(|(v, &s)| (s, s + g.vertices[v].latency))
        .collect()
}

// ---- contention windows ----------------------------------------------------

#[derive(Clone, Debug)]
struct WindowAccess {
    dyn_index: usize,
    vertex: usize,
    kind: AccessKind,
    must_use_bus: bool,
}

#[derive(Clone, Debug)]
struct Window {
    me: WindowAccess,
    fes: Vec<WindowAccess>,
}

/// Groups each bus-capable memory access with the bus-capable fetches that
/// follow it inside the same block instance, within the structural distance
/// bound (no dependency path back to the memory access) and the point cap.
fn build_windows(spec: &PipelineSpec, seq: &[DynInstr]) -> Vec<Window> {
    let ns = spec.stages.len();
    let n_max = default_contention_window(spec);
    let distance = spec.window_distance_bound();
    let mut items: Vec<(usize, WindowAccess)> = Vec::new();
    for (d, di) in seq.iter().enumerate() {
        if di.fetch.may_use_bus() {
            items.push((
                di.step,
                WindowAccess {
                    dyn_index: d,
                    vertex: vertex(ns, d, spec.fetch_stage()),
                    kind: AccessKind::Fetch,
                    must_use_bus: di.fetch.must_use_bus(),
                },
            ));
        }
        if di.class.uses_memory() && di.data.expect("memory instruction").may_use_bus() {
            items.push((
                di.step,
                WindowAccess {
                    dyn_index: d,
                    vertex: vertex(ns, d, spec.memory_stage()),
                    kind: AccessKind::Data,
                    must_use_bus: di.data.unwrap().must_use_bus(),
                },
            ));
        }
    }
    // Evaluation order: by vertex index.
    items.sort_by_key(|(_, a)| a.vertex);
    let mut windows = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let (step, ref acc) = items[i];
        if acc.kind != AccessKind::Data {
            i += 1;
            continue;
        }
        let me = acc.clone();
        let mut fes = Vec::new();
        let mut j = i + 1;
        while j < items.len() && fes.len() < n_max {
            let (fstep, ref cand) = items[j];
            if fstep != step
                || cand.kind == AccessKind::Data
                || cand.dyn_index - me.dyn_index >= distance
            {
                break;
            }
            fes.push(cand.clone());
            j += 1;
        }
        windows.push(Window { me, fes });
        i = j.max(i + 1);
    }
    windows
}

/// Default contention-window size: queue room plus stage widths strictly
/// between the fetch and the memory stage.
pub fn default_contention_window(spec: &PipelineSpec) -> usize {
    spec.window_point_cap()
}

// ---- full path solve --------------------------------------------------------

/// Start/end times per (dynamic instruction, stage) plus the path total.
#[derive(Clone, Debug)]
pub struct SolvedPath {
    pub times: Vec<(i64, i64)>,
    pub num_stages: usize,
    pub total: i64,
}

/// Solves one path under one configuration (a predicate over dynamic
/// accesses), including bus-contention windows.
pub fn solve_path(
    spec: &PipelineSpec,
    cfg: &Cfg,
    path: &[BlockId],
    gamma: &dyn Fn(usize, AccessKind) -> bool,
) -> SolvedPath {
    let (seq, _) = unroll(cfg, path);
    let sg = build_graph(spec, &seq, gamma);
    let windows = build_windows(spec, &seq);
    let lam = spec.bus_latency as i64;
    let mut floors: BTreeMap<usize, i64> = BTreeMap::new();
    for w in &windows {
        let me_uses = w.me.must_use_bus || gamma(w.me.dyn_index, AccessKind::Data);
        let me_ready = solve_floored(&sg.graph, &floors)[w.me.vertex].0;
        let mut input = ContentionInput {
            me_ready,
            me_uses_bus: me_uses,
            fes: Vec::new(),
            bus_latency: lam,
        };
        for fe in &w.fes {
            let ready = solve_floored(&sg.graph, &floors)[fe.vertex].0;
            input.fes.push(FeRequest {
                ready,
                uses_bus: fe.must_use_bus || gamma(fe.dyn_index, AccessKind::Fetch),
            });
            let sched = simulate_contention(&input);
            let idx = input.fes.len() - 1;
            floors.insert(fe.vertex, sched.fe_starts[idx]);
        }
        let sched = simulate_contention(&input);
        if let Time::Fin(g) = sched.me_grant {
            floors.insert(w.me.vertex, g.max(me_ready));
        }
    }
    let times = solve_floored(&sg.graph, &floors);
    let total = times.last().map(|&(_, e)| e).unwrap_or(0);
    SolvedPath {
        times,
        num_stages: sg.num_stages,
        total,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use timing_ir::Cfg;

    const STRAIGHT: &str = r#"
schema = "program/1"
name = "straight"
entry = "b0"
exit = "b1"

[[block]]
id = "b0"
[[block.instr]]
class = "alu-add"
fetch = "AH"

[[block]]
id = "b1"
[[block.instr]]
class = "alu-add"
fetch = "AH"

[[edge]]
from = "b0"
to = "b1"
"#;

    #[test]
    fn straight_line_has_one_path() {
        let cfg = Cfg::parse(STRAIGHT).unwrap();
        let e = enumerate(&cfg).unwrap();
        assert_eq!(e.paths.len(), 1);
        assert!(e.paths[0].accesses.is_empty());
        let spec = PipelineSpec::teaching();
        let solved = solve_path(&spec, &cfg, &e.paths[0].blocks, &|_, _| false);
        // Two instructions through five unit-latency stages; the two-way
        // pipeline lets them march in the same cycle.
        assert_eq!(solved.total, 5);
    }

    #[test]
    fn contention_window_size_is_frozen() {
        // Teaching pipeline: queues FE/DE/EX (2 each) + widths of DE and EX.
        assert_eq!(default_contention_window(&PipelineSpec::teaching()), 10);
        // Four-wide: queues FE/DE (4 each) + width of DE.
        assert_eq!(default_contention_window(&PipelineSpec::wide4()), 12);
    }
}
