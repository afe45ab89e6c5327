//! Per-block transform plans: the step stream split at contention points,
//! each span pre-compiled to a matrix (or kept as atoms for the
//! interpreter), plus the window grouping of bus accesses.

use timing_ir::{AccessKind, PipelineSpec};
use xdd::{StateVector, TransitionMatrix, XddStore};

use pipeline_model::{
    compile::{compose_atoms, interpret_atoms},
    steps::{Atom, BlockSteps, BusAccess},
    PipelineLayout,
};

use crate::contention::{schedule, BusPoint, ContentionSequence, ContentionTrace};
use crate::Result;

/// A bus-capable access of one block, cut after its wait phase.
#[derive(Clone, Debug)]
pub struct ContentionPoint {
    /// Index into the block's vertex stream.
    pub vertex: usize,
    pub kind: AccessKind,
    pub point: BusPoint,
    /// Global position of the owning instruction within the block.
    pub instr: usize,
}

/// A window: one memory access and the fetches grouped behind it. Indices
/// refer to the block's contention-point list; the fetches are consecutive.
#[derive(Clone, Debug)]
pub struct WindowSpec {
    pub me: usize,
    pub fes: Vec<usize>,
}

/// Atom span between two cuts, with its pre-compiled matrix.
#[derive(Clone, Debug)]
pub struct Span {
    pub atoms: Vec<Atom>,
    pub matrix: TransitionMatrix,
}

/// Execution plan of one block.
#[derive(Clone, Debug)]
pub struct BlockPlan {
    /// `spans[i]` leads to cut `i`; the last span leads to the block end.
    pub spans: Vec<Span>,
    pub points: Vec<ContentionPoint>,
    pub windows: Vec<WindowSpec>,
    pub instruction_count: usize,
}

/// Finds the block's bus-capable accesses in evaluation order, interning the
/// generation-0 event of each conditional access.
pub fn find_contention_points(store: &mut XddStore, steps: &BlockSteps) -> Vec<ContentionPoint> {
    let mut out = Vec::new();
    for (vi, v) in steps.vertices.iter().enumerate() {
        let (kind, must, base) = match v.bus {
            Some(BusAccess::Fetch {
                must_use_bus,
                event,
            }) => (AccessKind::Fetch, must_use_bus, event),
            Some(BusAccess::Data {
                must_use_bus,
                event,
            }) => (AccessKind::Data, must_use_bus, event),
            None => continue,
        };
        out.push(ContentionPoint {
            vertex: vi,
            kind,
            point: BusPoint {
                must_use_bus: must,
                event: base.map(|b| store.event(b, 0)),
            },
            instr: v.instr,
        });
    }
    out
}

/// Groups memory accesses with their following fetches, all within this
/// block. Membership is bounded two ways: at most `n_max` fetch contenders,
/// and only fetches closer than `distance` instructions (further ones are
/// gated by the memory access through the queue chain and cannot overtake
/// it, which the schedule's no-path precondition relies on).
pub fn group_windows(
    points: &[ContentionPoint],
    n_max: usize,
    distance: usize,
) -> Vec<WindowSpec> {
    let mut windows = Vec::new();
    let mut i = 0;
    while i < points.len() {
        if points[i].kind != AccessKind::Data {
            i += 1;
            continue;
        }
        let mut fes = Vec::new();
        let mut j = i + 1;
        while j < points.len()
            && fes.len() < n_max
            && points[j].kind == AccessKind::Fetch
            && points[j].instr - points[i].instr < distance
        {
            fes.push(j);
            j += 1;
        }
        windows.push(WindowSpec { me: i, fes });
        i = j.max(i + 1);
    }
    windows
}

/// Builds the plan of one block: spans split after each contention point's
/// wait phase, pre-compiled matrices, and the window grouping.
pub fn plan_block(
    store: &mut XddStore,
    spec: &PipelineSpec,
    layout: &PipelineLayout,
    steps: &BlockSteps,
    n_max: usize,
) -> Result<BlockPlan> {
    let points = find_contention_points(store, steps);
    let windows = group_windows(&points, n_max, spec.window_distance_bound());

    // Atom spans between cuts.
    let mut spans = Vec::new();
    let mut current: Vec<Atom> = Vec::new();
    let mut next_point = 0;
    for (vi, v) in steps.vertices.iter().enumerate() {
        current.extend(v.wait_atoms(layout));
        if next_point < points.len() && points[next_point].vertex == vi {
            spans.push(current);
            current = Vec::new();
            next_point += 1;
        }
        current.extend(v.rest_atoms(layout));
    }
    spans.push(current);

    let spans = spans
        .into_iter()
        .map(|atoms| {
            let mut matrix = TransitionMatrix::identity(layout.slots(), store);
            compose_atoms(store, &mut matrix, &atoms)?;
            Ok(Span { atoms, matrix })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(BlockPlan {
        spans,
        points,
        windows,
        instruction_count: steps.vertices.len() / spec.stages.len().max(1),
    })
}

/// How a plan is applied to states.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum ApplyMode {
    Matrices,
    Interpreter,
}

/// Support snapshots taken at every cut, for the event-lifetime metric.
pub type SupportProbe<'a> = dyn FnMut(usize, &StateVector) + 'a;

/// Applies one block to one input state, resolving every window exactly.
pub fn apply_block(
    store: &mut XddStore,
    layout: &PipelineLayout,
    plan: &BlockPlan,
    spec: &PipelineSpec,
    input: &StateVector,
    mode: ApplyMode,
    mut trace: Option<&mut Vec<ContentionTrace>>,
    probe: Option<&mut SupportProbe<'_>>,
) -> Result<StateVector> {
    let apply_span = |store: &mut XddStore, state: &StateVector, span: &Span| -> Result<StateVector> {
        match mode {
            ApplyMode::Matrices => Ok(state.apply(&span.matrix, store)?),
            ApplyMode::Interpreter => {
                let mut s = state.clone();
                interpret_atoms(store, layout, &mut s, &span.atoms)?;
                Ok(s)
            }
        }
    };

    if plan.points.is_empty() {
        return apply_span(store, input, &plan.spans[0]);
    }

    let lam = store.leaf(spec.bus_latency as i64);
    let mut probe = probe;
    let mut state = apply_span(store, input, &plan.spans[0])?;
    let mut cut = 0; // state sits at the cut of points[cut]
    if let Some(p) = probe.as_deref_mut() {
        p(plan.points[0].instr, &state);
    }
    for w in &plan.windows {
        // Advance to the window's memory access.
        while cut < w.me {
            cut += 1;
            state = apply_span(store, &state, &plan.spans[cut])?;
            if let Some(p) = probe.as_deref_mut() {
                p(plan.points[cut].instr, &state);
            }
        }
        // Pass one: ready times and grants, no memory grant applied.
        let seq = ContentionSequence {
            me: plan.points[w.me].point,
            fes: w.fes.iter().map(|&i| plan.points[i].point).collect(),
            bridges: w
                .fes
                .iter()
                .map(|&i| plan.spans[i].matrix.clone())
                .collect(),
            bus_latency: spec.bus_latency,
        };
        let result = match mode {
            ApplyMode::Matrices => {
                let t = trace.as_deref_mut().map(|ts| {
                    ts.push(ContentionTrace::default());
                    ts.last_mut().unwrap()
                });
                schedule(store, &seq, &state, t)?
            }
            ApplyMode::Interpreter => {
                // The schedule needs the same bridges; interpret them by
                // applying atom spans step-wise through a matrix-free walk.
                let t = trace.as_deref_mut().map(|ts| {
                    ts.push(ContentionTrace::default());
                    ts.last_mut().unwrap()
                });
                schedule_interpreted(store, layout, plan, w, spec, &state, t)?
            }
        };
        // Pass two: replay the fetch chain with the memory grant in place.
        let merged = store.oplus(state.rho(), result.me_grant);
        state.set_rho(merged);
        for (k, &i) in w.fes.iter().enumerate() {
            cut = i;
            state = apply_span(store, &state, &plan.spans[i])?;
            if let Some(p) = probe.as_deref_mut() {
                p(plan.points[i].instr, &state);
            }
            let bump = store.otimes(result.fe_grants[k], lam)?;
            let merged = store.oplus(state.rho(), bump);
            state.set_rho(merged);
        }
    }
    // Remaining cuts (window-less fetches) and the tail span.
    while cut < plan.points.len() - 1 {
        cut += 1;
        state = apply_span(store, &state, &plan.spans[cut])?;
        if let Some(p) = probe.as_deref_mut() {
            p(plan.points[cut].instr, &state);
        }
    }
    state = apply_span(store, &state, &plan.spans[plan.points.len()])?;
    Ok(state)
}

/// Interpreter-mode variant of the window schedule: identical logic, spans
/// applied atom by atom.
fn schedule_interpreted(
    store: &mut XddStore,
    layout: &PipelineLayout,
    plan: &BlockPlan,
    w: &WindowSpec,
    spec: &PipelineSpec,
    s0: &StateVector,
    trace: Option<&mut ContentionTrace>,
) -> Result<crate::contention::ContentionResult> {
    // Build one-off bridge matrices from the atom spans; the interpreter
    // path still exercises span atoms for the final state elsewhere.
    let bridges = w
        .fes
        .iter()
        .map(|&i| {
            let mut m = TransitionMatrix::identity(layout.slots(), store);
            compose_atoms(store, &mut m, &plan.spans[i].atoms)?;
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()?;
    let seq = ContentionSequence {
        me: plan.points[w.me].point,
        fes: w.fes.iter().map(|&i| plan.points[i].point).collect(),
        bridges,
        bus_latency: spec.bus_latency,
    };
    schedule(store, &seq, s0, trace)
}
