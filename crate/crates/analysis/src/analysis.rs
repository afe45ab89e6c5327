//! Worklist fixpoint over sets of temporal states: per-block matrix
//! application with exact bus scheduling, rebasing at block exits, and
//! generation bumping around back edges. Blocks are processed sequentially
//! in ascending id order, so results are reproducible bit for bit.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use timing_ir::{loops, BlockId, Cfg, PipelineSpec};
use xdd::{EventBase, ExtTime, ShiftOp, StateVector, XddHandle, XddStore};

use pipeline_model::{build_layout, steps::gen_block_steps, EventBinding, PipelineLayout};

use crate::blocks::{apply_block, plan_block, ApplyMode, BlockPlan};
use crate::contention::contention_window;
use crate::{AnalysisError, Result};

/// Knobs of the analysis; defaults match the command-line defaults.
#[derive(Clone, Debug)]
pub struct AnalyzeOpts {
    pub use_matrices: bool,
    /// State-set size cap per block; breaching it fails (or widens).
    pub max_states: usize,
    /// Generation cap; events bumped past it are pessimistically merged.
    pub max_gen: u32,
    /// Join the whole state set into one state on a cap breach instead of
    /// failing. Loses exactness; reported loudly.
    pub widen: bool,
    /// Budget on block applications before giving up.
    pub max_iterations: usize,
    /// Contention-window override (None: derived from the pipeline).
    pub window_override: Option<usize>,
    /// Collect every window's intermediate diagrams (see `Analyzer::traces`).
    pub trace_contention: bool,
}

impl Default for AnalyzeOpts {
    fn default() -> Self {
        AnalyzeOpts {
            use_matrices: true,
            max_states: 64,
            // Events survive about pipeline-window / block-size iterations;
            // leave generous headroom before pessimizing.
            max_gen: 16,
            widen: false,
            max_iterations: 100_000,
            window_override: None,
            trace_contention: false,
        }
    }
}

/// A deduplicated set of states sharing one time base.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StateSet {
    /// Opaque origin marker; sets with different markers must not be merged.
    pub marker: u64,
    states: Vec<StateVector>,
}

impl StateSet {
    pub fn new(marker: u64) -> StateSet {
        StateSet {
            marker,
            states: Vec::new(),
        }
    }

    pub fn insert(&mut self, s: StateVector) -> bool {
        match self.states.binary_search(&s) {
            Ok(_) => false,
            Err(pos) => {
                self.states.insert(pos, s);
                true
            }
        }
    }

    /// Merges another set with the same origin marker.
    pub fn merge(&mut self, other: &StateSet) -> Result<bool> {
        if self.marker != other.marker {
            return Err(AnalysisError::BaseMismatch {
                left: self.marker,
                right: other.marker,
            });
        }
        let mut grew = false;
        for s in &other.states {
            grew |= self.insert(s.clone());
        }
        Ok(grew)
    }

    /// Re-anchors states to a new origin marker (a deliberate adoption step,
    /// unlike `merge` which refuses mixed origins).
    pub fn adopt(&mut self, states: impl IntoIterator<Item = StateVector>) -> bool {
        let mut grew = false;
        for s in states {
            grew |= self.insert(s);
        }
        grew
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Per-block delay diagrams: the time pointer of each output state before
/// rebasing, relative to the block's input base.
#[derive(Clone, Debug)]
pub struct BlockTiming {
    pub block: BlockId,
    pub times: Vec<XddHandle>,
    pub pessimized: bool,
}

impl BlockTiming {
    /// Worst finite delay across events and states; a `+inf` leaf marks an
    /// internal scheduling bug and is an error.
    pub fn wcet(&self, store: &XddStore) -> Result<i64> {
        let mut worst = 0i64;
        for &t in &self.times {
            match store.max_leaf(t) {
                ExtTime::PosInf => return Err(AnalysisError::UnscheduledContention),
                ExtTime::Finite(v) => worst = worst.max(v),
                ExtTime::NegInf => {}
            }
        }
        Ok(worst)
    }
}

/// Everything the worklist computed for one block.
#[derive(Clone, Debug)]
pub struct BlockOutcome {
    pub input: StateSet,
    pub output: StateSet,
    pub timing: BlockTiming,
}

/// Result of the whole-program analysis.
#[derive(Debug)]
pub struct Analysis {
    pub per_block: BTreeMap<BlockId, BlockOutcome>,
    /// States flowing along each edge (the source's output set size).
    pub edge_states: BTreeMap<(BlockId, BlockId), usize>,
    /// Event lifetimes in instructions, at contention-point granularity.
    pub event_lifetimes: BTreeMap<String, u64>,
    /// Whether any generation cap pessimized a diagram.
    pub pessimized: bool,
    pub iterations: usize,
}

impl Analysis {
    pub fn block_wcet(&self, store: &XddStore, block: BlockId) -> Result<i64> {
        self.per_block[&block].timing.wcet(store)
    }
}

/// The analysis engine: owns the derived model and the diagram store.
pub struct Analyzer<'a> {
    pub store: &'a mut XddStore,
    pub spec: &'a PipelineSpec,
    pub cfg: &'a Cfg,
    pub layout: PipelineLayout,
    pub binding: EventBinding,
    pub plans: BTreeMap<BlockId, BlockPlan>,
    pub opts: AnalyzeOpts,
    /// Window traces collected when `opts.trace_contention` is set.
    pub traces: Vec<(BlockId, crate::contention::ContentionTrace)>,
    back_edges: Vec<(BlockId, BlockId)>,
    loop_bases: BTreeMap<BlockId, BTreeSet<EventBase>>,
    shift_ops: BTreeMap<BlockId, ShiftOp>,
}

impl<'a> Analyzer<'a> {
    pub fn new(
        store: &'a mut XddStore,
        spec: &'a PipelineSpec,
        cfg: &'a Cfg,
        opts: AnalyzeOpts,
    ) -> Result<Analyzer<'a>> {
        let layout = build_layout(spec);
        let binding = EventBinding::create(store, cfg);
        let n_max = opts.window_override.unwrap_or_else(|| contention_window(spec));
        let mut plans = BTreeMap::new();
        for block in &cfg.blocks {
            let steps = gen_block_steps(
                store,
                spec,
                &layout,
                &binding,
                block.id,
                &block.instrs,
            )?;
            plans.insert(block.id, plan_block(store, spec, &layout, &steps, n_max)?);
        }
        let back_edges = loops::back_edges(cfg);
        // Events owned by each loop, for generation bumping on back edges.
        let mut loop_bases: BTreeMap<BlockId, BTreeSet<EventBase>> = BTreeMap::new();
        for &(_, header) in &back_edges {
            let body = loops::natural_loop(cfg, header);
            let bases = binding
                .iter()
                .filter(|(spec_, _)| body.contains(&spec_.block))
                .map(|&(_, base)| base)
                .collect();
            loop_bases.insert(header, bases);
        }
        let shift_ops = loop_bases
            .iter()
            .map(|(&h, bases)| (h, store.shift_op(bases, opts.max_gen)))
            .collect();
        Ok(Analyzer {
            store,
            spec,
            cfg,
            layout,
            binding,
            plans,
            opts,
            traces: Vec::new(),
            back_edges,
            loop_bases,
            shift_ops,
        })
    }

    /// The entry state: every resource available at time zero.
    pub fn initial_state(&mut self) -> StateVector {
        let mut s = StateVector::uniform(self.layout.slots(), self.store.one());
        s.set_rho(self.store.one());
        s
    }

    /// Applies one block to one state (bus windows included), returning the
    /// un-rebased output.
    pub fn transform(
        &mut self,
        block: BlockId,
        state: &StateVector,
        probe: Option<&mut crate::blocks::SupportProbe<'_>>,
    ) -> Result<StateVector> {
        let mode = if self.opts.use_matrices {
            ApplyMode::Matrices
        } else {
            ApplyMode::Interpreter
        };
        let plan = &self.plans[&block];
        let mut scratch = Vec::new();
        let trace = self.opts.trace_contention.then_some(&mut scratch);
        let out = apply_block(
            self.store, &self.layout, plan, self.spec, state, mode, trace, probe,
        )?;
        for t in scratch {
            self.traces.push((block, t));
        }
        Ok(out)
    }

    /// The rebasing origin of an output state: its time pointer when that
    /// has only finite leaves, else the constant worst leaf.
    pub fn rebase_origin(&mut self, out: &StateVector) -> Result<(XddHandle, bool)> {
        let rho = out.rho();
        let leaves = self.store.leaves(rho);
        if leaves.iter().all(|l| l.is_finite()) {
            return Ok((rho, false));
        }
        if leaves.contains(&ExtTime::PosInf) {
            return Err(AnalysisError::UnscheduledContention);
        }
        let worst = leaves
            .iter()
            .rev()
            .find_map(|l| l.value())
            .unwrap_or(0);
        Ok((self.store.leaf(worst), true))
    }

    /// Rebases an output state and saturates stale slots.
    ///
    /// Every future dependency wait is bounded below by the first stage's
    /// program-order chain, so slot values under that chain's minimum can
    /// never again decide a maximum. Raising them to a common floor keeps
    /// timings exact while stopping slots of long-dead dependencies from
    /// drifting without bound and blocking the fixpoint.
    pub fn rebase_and_clamp(
        &mut self,
        out: &StateVector,
    ) -> Result<(StateVector, XddHandle, bool)> {
        let (origin, flagged) = self.rebase_origin(out)?;
        let mut state = out.rebase(origin, self.store)?;
        let po_first = self
            .layout
            .lookup(&format!("po:{}", self.spec.stages[0].name))
            .expect("first stage has a program-order slot");
        let anchor = state.get(self.layout.resource(po_first).slots[0]);
        if let Some(ExtTime::Finite(min)) = self.store.leaves(anchor).first().copied() {
            let floor = self.store.mk_leaf(ExtTime::Finite(min - 1));
            for (i, _) in self.layout.slots().clone().slots() {
                let clamped = self.store.oplus(state.get(i), floor);
                state.set(i, clamped);
            }
        }
        Ok((state, origin, flagged))
    }

    /// Bumps the generation of every event of `header`'s loop in every slot.
    pub fn bump_generation(
        &mut self,
        state: &StateVector,
        header: BlockId,
    ) -> Result<(StateVector, bool)> {
        let Some(&op) = self.shift_ops.get(&header) else {
            return Ok((state.clone(), false));
        };
        let mut out = state.clone();
        let mut flagged = false;
        for (i, _) in self.layout.slots().clone().slots() {
            let (h, f) = self.store.shift_generations(op, state.get(i))?;
            out.set(i, h);
            flagged |= f;
        }
        Ok((out, flagged))
    }

    pub fn is_back_edge(&self, from: BlockId, to: BlockId) -> bool {
        self.back_edges.contains(&(from, to))
    }

    pub fn loop_event_bases(&self, header: BlockId) -> Option<&BTreeSet<EventBase>> {
        self.loop_bases.get(&header)
    }

    /// Runs the worklist to its least fixpoint.
    pub fn analyze(&mut self) -> Result<Analysis> {
        let mut inputs: BTreeMap<BlockId, StateSet> = BTreeMap::new();
        let mut outputs: BTreeMap<BlockId, StateSet> = BTreeMap::new();
        for b in &self.cfg.blocks {
            inputs.insert(b.id, StateSet::new(marker_for(Some(b.id))));
            outputs.insert(b.id, StateSet::new(marker_for(Some(b.id)) + 1));
        }
        let init = self.initial_state();
        inputs.get_mut(&self.cfg.entry).unwrap().insert(init);

        let mut timings: BTreeMap<BlockId, Vec<XddHandle>> = BTreeMap::new();
        let mut pessimized_blocks: BTreeSet<BlockId> = BTreeSet::new();
        let mut lifespan = LifetimeTracker::default();
        let mut queue: VecDeque<BlockId> = VecDeque::new();
        let mut queued: BTreeSet<BlockId> = BTreeSet::new();
        queue.push_back(self.cfg.entry);
        queued.insert(self.cfg.entry);
        let mut iterations = 0usize;
        let mut pessimized = false;

        while let Some(block) = pop_min(&mut queue, &mut queued) {
            iterations += 1;
            if iterations > self.opts.max_iterations {
                return Err(AnalysisError::IterationBudget {
                    block: self.cfg.block(block).name.clone(),
                    budget: self.opts.max_iterations,
                });
            }
            let in_set = inputs[&block].clone();
            let block_len = self.cfg.block(block).instrs.len() as u64;
            let mut out_set = StateSet::new(outputs[&block].marker);
            let mut times = Vec::new();
            for s in in_set.states() {
                let mut probes: Vec<(usize, StateVector)> = Vec::new();
                let mut probe = |instr: usize, sv: &StateVector| {
                    probes.push((instr, sv.clone()));
                };
                let out = self.transform(block, s, Some(&mut probe))?;
                times.push(out.rho());
                // A constant-leaf origin is still an exact rebase; only
                // generation caps and widening cost exactness.
                let (rebased, _origin, _constant_origin) = self.rebase_and_clamp(&out)?;
                for (instr, sv) in &probes {
                    lifespan.observe(self.store, *instr as u64, sv);
                }
                lifespan.observe(self.store, block_len, &rebased);
                out_set.insert(rebased);
            }
            lifespan.advance(block_len);
            if out_set.len() > self.opts.max_states {
                if self.opts.widen {
                    out_set = widen_join(self.store, out_set)?;
                    pessimized = true;
                    pessimized_blocks.insert(block);
                } else {
                    return Err(AnalysisError::StateBudget {
                        block: self.cfg.block(block).name.clone(),
                        states: out_set.len(),
                        budget: self.opts.max_states,
                    });
                }
            }
            timings.insert(block, times);
            let changed = outputs[&block] != out_set;
            debug_assert!(
                outputs[&block]
                    .states()
                    .iter()
                    .all(|s| out_set.states().binary_search(s).is_ok()),
                "output set shrank at {}",
                self.cfg.block(block).name
            );
            outputs.insert(block, out_set);
            if changed {
                let succs: Vec<BlockId> = self.cfg.successors(block).collect();
                for succ in succs {
                    // Rebuild the successor's input from all predecessors,
                    // bumping generations along back edges.
                    let mut fresh = StateSet::new(inputs[&succ].marker);
                    let preds: Vec<BlockId> = self.cfg.predecessors(succ).collect();
                    for p in preds {
                        let back = self.is_back_edge(p, succ);
                        let states: Vec<StateVector> = outputs[&p].states().to_vec();
                        for st in states {
                            let st = if back {
                                let (bumped, f) = self.bump_generation(&st, succ)?;
                                if f {
                                    pessimized = true;
                                    pessimized_blocks.insert(succ);
                                }
                                bumped
                            } else {
                                st
                            };
                            fresh.insert(st);
                        }
                    }
                    if fresh != inputs[&succ] {
                        inputs.insert(succ, fresh);
                        if queued.insert(succ) {
                            queue.push_back(succ);
                        }
                    }
                }
            }
        }

        let lifetimes = lifespan.finish();
        let mut per_block = BTreeMap::new();
        for b in &self.cfg.blocks {
            per_block.insert(
                b.id,
                BlockOutcome {
                    input: inputs[&b.id].clone(),
                    output: outputs[&b.id].clone(),
                    timing: BlockTiming {
                        block: b.id,
                        times: timings.get(&b.id).cloned().unwrap_or_default(),
                        pessimized: pessimized_blocks.contains(&b.id),
                    },
                },
            );
        }
        let mut edge_states = BTreeMap::new();
        for &(s, d) in &self.cfg.edges {
            edge_states.insert((s, d), per_block[&s].output.len());
        }
        Ok(Analysis {
            per_block,
            edge_states,
            event_lifetimes: lifetimes,
            pessimized,
            iterations,
        })
    }

    /// Chains block transforms along one explicit path without rebasing,
    /// bumping generations at back edges: the exactness witness used by the
    /// oracle cross-check. Does not collect window traces.
    pub fn trace_path(&mut self, path: &[BlockId]) -> Result<StateVector> {
        let tracing = std::mem::replace(&mut self.opts.trace_contention, false);
        let mut state = self.initial_state();
        let mut walk = || -> Result<StateVector> {
            for (k, &b) in path.iter().enumerate() {
                if k > 0 && self.is_back_edge(path[k - 1], b) {
                    let (bumped, _) = self.bump_generation(&state, b)?;
                    state = bumped;
                }
                state = self.transform(b, &state, None)?;
            }
            Ok(state.clone())
        };
        let result = walk();
        self.opts.trace_contention = tracing;
        result
    }
}

fn marker_for(block: Option<BlockId>) -> u64 {
    match block {
        None => 0,
        Some(b) => 2 + 2 * b.0 as u64,
    }
}

/// Lifetime bookkeeping: instruction distance between the first and last
/// observation of each event during the analysis, sampled at contention
/// points and block exits. An over-approximation, like the granularity of
/// the matrices themselves.
#[derive(Default)]
struct LifetimeTracker {
    clock: u64,
    first: BTreeMap<String, u64>,
    last: BTreeMap<String, u64>,
}

impl LifetimeTracker {
    fn observe(&mut self, store: &XddStore, offset: u64, state: &StateVector) {
        let at = self.clock + offset;
        let mut seen: BTreeSet<String> = BTreeSet::new();
        for &h in state.handles() {
            for e in store.support(h) {
                seen.insert(store.event_name(e));
            }
        }
        for name in seen {
            self.first.entry(name.clone()).or_insert(at);
            let entry = self.last.entry(name).or_insert(at);
            *entry = (*entry).max(at);
        }
    }

    fn advance(&mut self, instructions: u64) {
        self.clock += instructions;
    }

    fn finish(self) -> BTreeMap<String, u64> {
        self.last
            .into_iter()
            .map(|(name, last)| {
                let first = self.first.get(&name).copied().unwrap_or(last);
                (name, last.saturating_sub(first))
            })
            .collect()
    }
}

fn pop_min(queue: &mut VecDeque<BlockId>, queued: &mut BTreeSet<BlockId>) -> Option<BlockId> {
    // Deterministic: always the smallest queued block id.
    let &min = queued.iter().next()?;
    queued.remove(&min);
    queue.retain(|&b| b != min);
    Some(min)
}

fn widen_join(store: &mut XddStore, set: StateSet) -> Result<StateSet> {
    let mut iter = set.states().iter();
    let mut acc = iter.next().expect("widening a non-empty set").clone();
    for s in iter {
        acc = acc.oplus(s, store)?;
    }
    let mut out = StateSet::new(set.marker);
    out.insert(acc);
    Ok(out)
}
