//! Timing-step programs: per (instruction, stage) the pipeline behavior is a
//! reset, a wait phase, start-of-stage releases, one consume, and
//! end-of-stage releases. Programs compile to matrices or run directly on a
//! state (see [`crate::compile`]).

use timing_ir::{AccessKind, BlockId, Classification, InstrClass, InstructionDescriptor, PipelineSpec};
use xdd::{EventBase, ExtTime, SlotIndex, XddHandle, XddNode, XddStore};

use crate::layout::{exec_order_names, PipelineLayout, ResourceId, ResourceKind};
use crate::{PipelineError, Result};

/// One timing step.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum Step {
    Wait(ResourceId),
    Release(ResourceId),
    Consume(XddHandle),
}

/// The step program of one (instruction, stage) vertex. The reset of the
/// time pointer is implicit at program start; the shape is
/// `WAIT* RELEASE* CONSUME RELEASE*`.
#[derive(Clone, Debug)]
pub struct StepProgram {
    pub waits: Vec<ResourceId>,
    pub start_releases: Vec<ResourceId>,
    pub consume: XddHandle,
    pub end_releases: Vec<ResourceId>,
}

impl StepProgram {
    pub fn steps(&self) -> Vec<Step> {
        let mut out: Vec<Step> = Vec::new();
        out.extend(self.waits.iter().map(|&r| Step::Wait(r)));
        out.extend(self.start_releases.iter().map(|&r| Step::Release(r)));
        out.push(Step::Consume(self.consume));
        out.extend(self.end_releases.iter().map(|&r| Step::Release(r)));
        out
    }
}

/// Elementary state transitions a step program lowers to.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum Atom {
    Reset,
    Wait(SlotIndex),
    Move { src: SlotIndex, dest: SlotIndex },
    Consume(XddHandle),
}

/// Lowers a release of `r` to moves: FIFOs shift away from the head (applied
/// from the tail so nothing is clobbered), then the head takes the time
/// pointer.
pub fn release_atoms(layout: &PipelineLayout, r: ResourceId, out: &mut Vec<Atom>) {
    let res = layout.resource(r);
    let rho = layout.rho();
    match res.kind {
        ResourceKind::Single => out.push(Atom::Move {
            src: rho,
            dest: res.slots[0],
        }),
        ResourceKind::Fifo => {
            for k in (0..res.slots.len() - 1).rev() {
                out.push(Atom::Move {
                    src: res.slots[k],
                    dest: res.slots[k + 1],
                });
            }
            out.push(Atom::Move {
                src: rho,
                dest: res.slots[0],
            });
        }
    }
}

/// Role a vertex plays in bus contention, if any.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum BusAccess {
    /// Fetch-side access (instruction cache miss).
    Fetch {
        must_use_bus: bool,
        event: Option<EventBase>,
    },
    /// Memory-side access (data cache miss).
    Data {
        must_use_bus: bool,
        event: Option<EventBase>,
    },
}

/// A vertex of the block's step stream with its program and bus role.
#[derive(Clone, Debug)]
pub struct VertexSteps {
    pub instr: usize,
    pub stage: usize,
    pub program: StepProgram,
    pub bus: Option<BusAccess>,
}

impl VertexSteps {
    /// Atoms of the wait phase, including the leading reset.
    pub fn wait_atoms(&self, layout: &PipelineLayout) -> Vec<Atom> {
        let mut out = vec![Atom::Reset];
        for &r in &self.program.waits {
            out.push(Atom::Wait(layout.resource(r).wait_slot()));
        }
        out
    }

    /// Atoms of everything after the wait phase.
    pub fn rest_atoms(&self, layout: &PipelineLayout) -> Vec<Atom> {
        let mut out = Vec::new();
        for &r in &self.program.start_releases {
            release_atoms(layout, r, &mut out);
        }
        out.push(Atom::Consume(self.program.consume));
        for &r in &self.program.end_releases {
            release_atoms(layout, r, &mut out);
        }
        out
    }

    pub fn atoms(&self, layout: &PipelineLayout) -> Vec<Atom> {
        let mut out = self.wait_atoms(layout);
        out.extend(self.rest_atoms(layout));
        out
    }
}

/// The step stream of one basic block, in evaluation order (instruction
/// major, stage minor).
#[derive(Clone, Debug)]
pub struct BlockSteps {
    pub block: BlockId,
    pub vertices: Vec<VertexSteps>,
}

impl BlockSteps {
    pub fn atoms(&self, layout: &PipelineLayout) -> Vec<Atom> {
        self.vertices
            .iter()
            .flat_map(|v| v.atoms(layout))
            .collect()
    }
}

/// Looks up the event base of one access; the binding is created from the
/// program's event inventory in deterministic order.
pub trait EventLookup {
    fn event_base(&self, block: BlockId, instr: usize, kind: AccessKind) -> Option<EventBase>;
}

/// Classification-dependent latency: a plain leaf for always-hit/always-miss,
/// an event node `NODE(e, hit, miss)` for not-classified accesses.
fn access_latency(
    store: &mut XddStore,
    class: Classification,
    event: Option<EventBase>,
    hit: u64,
    miss: u64,
) -> Result<XddHandle> {
    let hit_leaf = store.leaf(hit as i64);
    let miss_leaf = store.leaf(miss as i64);
    Ok(match class {
        Classification::AlwaysHit => hit_leaf,
        Classification::AlwaysMiss => miss_leaf,
        Classification::NotClassified => {
            let base = event.ok_or(PipelineError::MissingEvent)?;
            let e = store.event(base, 0);
            store.mk_node(e, hit_leaf, miss_leaf)?
        }
    })
}

/// Consume latencies must be non-negative (events may only branch between
/// non-negative alternatives).
fn check_consume(store: &XddStore, h: XddHandle) -> Result<()> {
    let ok = match store.node(h) {
        XddNode::Leaf(ExtTime::Finite(v)) => v >= 0,
        XddNode::Leaf(_) => false,
        XddNode::Branch { .. } => store
            .leaves(h)
            .iter()
            .all(|l| matches!(l, ExtTime::Finite(v) if *v >= 0)),
    };
    if ok {
        Ok(())
    } else {
        Err(PipelineError::NegativeLatency {
            latency: store.compact(h),
        })
    }
}

/// Generates the step program of one (instruction, stage) vertex.
pub fn gen_steps(
    store: &mut XddStore,
    spec: &PipelineSpec,
    layout: &PipelineLayout,
    events: &dyn EventLookup,
    block: BlockId,
    instr_idx: usize,
    instr: &InstructionDescriptor,
    stage: usize,
) -> Result<VertexSteps> {
    let stages = &spec.stages;
    let stage_name = &stages[stage].name;
    let is_exec = stage == spec.execute_stage();
    let is_mem = stage == spec.memory_stage();
    let is_fetch = stage == spec.fetch_stage();
    let mem_here = is_mem && instr.uses_memory();

    let (po_name, cap_name) = if is_exec {
        exec_order_names(spec, instr.class)
    } else {
        (format!("po:{stage_name}"), format!("cap:{stage_name}"))
    };
    let po = layout.lookup(&po_name)?;
    let cap = layout.lookup(&cap_name)?;

    let mut waits = vec![po, cap];
    if stage > 0 {
        waits.push(layout.lookup(&format!("pipe:{}", stages[stage - 1].name))?);
    }
    if spec.queue_after(stage).is_some() {
        waits.push(layout.lookup(&format!("q:{stage_name}"))?);
    }
    if is_fetch {
        waits.push(layout.lookup("fetch")?);
    }
    if mem_here {
        waits.push(layout.lookup("mem:load")?);
        waits.push(layout.lookup("mem:store")?);
    }
    if (is_exec || mem_here) && !instr.reads.is_empty() {
        for &r in &instr.reads {
            waits.push(layout.lookup(&format!("reg:{r}"))?);
        }
    }

    let mut start_releases = vec![po];
    if stage > 0 && spec.queue_after(stage - 1).is_some() {
        start_releases.push(layout.lookup(&format!("q:{}", stages[stage - 1].name))?);
    }

    let fetch_event = events.event_base(block, instr_idx, AccessKind::Fetch);
    let data_event = events.event_base(block, instr_idx, AccessKind::Data);
    let consume = if is_fetch {
        access_latency(
            store,
            instr.fetch,
            fetch_event,
            stages[stage].latency,
            spec.miss_latency,
        )?
    } else if mem_here {
        let data = instr.data.expect("memory instruction has data class");
        access_latency(
            store,
            data,
            data_event,
            spec.class_latency(instr.class),
            spec.miss_latency,
        )?
    } else if is_exec {
        store.leaf(spec.class_latency(instr.class) as i64)
    } else {
        store.leaf(stages[stage].latency as i64)
    };
    check_consume(store, consume)?;

    let mut end_releases = vec![layout.lookup(&format!("pipe:{stage_name}"))?, cap];
    if mem_here {
        let slot = match instr.class {
            InstrClass::Load => "mem:load",
            InstrClass::Store => "mem:store",
            _ => unreachable!("memory classes are load and store"),
        };
        end_releases.push(layout.lookup(slot)?);
    }
    if is_fetch && instr.fetch.may_use_bus() {
        end_releases.push(layout.lookup("fetch")?);
    }
    let produce_stage = if instr.class == InstrClass::Load {
        spec.memory_stage()
    } else {
        spec.execute_stage()
    };
    if stage == produce_stage && !instr.writes.is_empty() {
        for &r in &instr.writes {
            end_releases.push(layout.lookup(&format!("reg:{r}"))?);
        }
    }

    let bus = if is_fetch && instr.fetch.may_use_bus() {
        Some(BusAccess::Fetch {
            must_use_bus: instr.fetch.must_use_bus(),
            event: fetch_event,
        })
    } else if mem_here && instr.data.expect("memory instruction").may_use_bus() {
        Some(BusAccess::Data {
            must_use_bus: instr.data.expect("memory instruction").must_use_bus(),
            event: data_event,
        })
    } else {
        None
    };

    Ok(VertexSteps {
        instr: instr_idx,
        stage,
        program: StepProgram {
            waits,
            start_releases,
            consume,
            end_releases,
        },
        bus,
    })
}

/// Generates the full step stream of a block: all instructions through all
/// stages, instruction major.
pub fn gen_block_steps(
    store: &mut XddStore,
    spec: &PipelineSpec,
    layout: &PipelineLayout,
    events: &dyn EventLookup,
    block: BlockId,
    instrs: &[InstructionDescriptor],
) -> Result<BlockSteps> {
    let mut vertices = Vec::with_capacity(instrs.len() * spec.stages.len());
    for (i, instr) in instrs.iter().enumerate() {
        for stage in 0..spec.stages.len() {
            vertices.push(gen_steps(
                store, spec, layout, events, block, i, instr, stage,
            )?);
        }
    }
    Ok(BlockSteps { block, vertices })
}
