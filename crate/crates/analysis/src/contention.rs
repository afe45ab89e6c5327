//! Batch bus scheduling: one memory access contends with the fetches that
//! follow it, first-come-first-served with the memory side winning ties.
//! Works configuration-wise on diagrams, so one run schedules every case.

use timing_ir::PipelineSpec;
use xdd::{EventId, ExtTime, StateVector, TransitionMatrix, XddHandle, XddStore};

use crate::{AnalysisError, Result};

/// One bus-capable access inside a window.
#[derive(Copy, Clone, Debug)]
pub struct BusPoint {
    /// Always-miss accesses request the bus unconditionally; otherwise the
    /// event decides per configuration.
    pub must_use_bus: bool,
    pub event: Option<EventId>,
}

impl BusPoint {
    /// The ready time as seen by the arbiter: `-inf` marks configurations
    /// that never request the bus.
    fn request(&self, store: &mut XddStore, ready: XddHandle) -> Result<XddHandle> {
        if self.must_use_bus {
            return Ok(ready);
        }
        let e = self.event.ok_or(AnalysisError::MissingEvent)?;
        let gate = store.indicator(e);
        Ok(store.otimes(ready, gate)?)
    }

    /// Memory-side view: configurations off the bus are pushed to `+inf` so
    /// they neither block fetches nor get scheduled; the final mask turns
    /// them into `-inf`.
    fn request_me(&self, store: &mut XddStore, ready: XddHandle) -> Result<XddHandle> {
        if self.must_use_bus {
            return Ok(ready);
        }
        let e = self.event.ok_or(AnalysisError::MissingEvent)?;
        let inf = store.pos_inf();
        let one = store.one();
        let gate = store.mk_node(e, inf, one)?;
        Ok(store.otimes(ready, gate)?)
    }

    fn mask_off_bus(&self, store: &mut XddStore, h: XddHandle) -> Result<XddHandle> {
        if self.must_use_bus {
            return Ok(h);
        }
        let e = self.event.ok_or(AnalysisError::MissingEvent)?;
        let gate = store.indicator(e);
        Ok(store.otimes(h, gate)?)
    }
}

/// A contention window: the memory access, its fetch contenders, and the
/// pre-computed matrices bridging them. `bridges[0]` leads from the state at
/// the memory access's wait point to the first fetch's wait point;
/// `bridges[i]` from fetch `i` to fetch `i + 1`.
#[derive(Clone, Debug)]
pub struct ContentionSequence {
    pub me: BusPoint,
    pub fes: Vec<BusPoint>,
    pub bridges: Vec<TransitionMatrix>,
    pub bus_latency: u64,
}

/// Scheduled bus grants. Fetch grants are grant floors: a fetch that lost
/// to the memory access is floored at its bus release; the chained state
/// reconciles later readiness.
#[derive(Clone, Debug)]
pub struct ContentionResult {
    pub me_grant: XddHandle,
    pub fe_grants: Vec<XddHandle>,
    /// State at each fetch's wait point, before its grant bump.
    pub fe_states: Vec<StateVector>,
    /// State after the last fetch's grant bump (without the memory grant).
    pub final_state: StateVector,
    /// First iteration at which the memory schedule was already complete.
    pub early_exit_at: Option<usize>,
}

/// Optional tracing of every intermediate diagram, labelled (a), (b), ...
/// in computation order.
#[derive(Clone, Debug, Default)]
pub struct ContentionTrace {
    pub entries: Vec<(String, String, String)>,
}

impl ContentionTrace {
    fn push(&mut self, store: &XddStore, what: &str, h: XddHandle) {
        let label = (b'a' + (self.entries.len() % 26) as u8) as char;
        self.entries
            .push((format!("({label})"), what.to_string(), store.compact(h)));
    }
}

/// Runs the window schedule.
///
/// The memory grant starts at `+inf` (nothing scheduled) and the fetch-side
/// bus release at `-inf` (bus untouched). Each fetch is compared against the
/// memory ready time: the earlier side is scheduled, ties go to the memory
/// side, and losing fetch configurations are floored at the memory access's
/// bus release. The final step schedules the remaining configurations after
/// the last fetch release. Every iteration is processed even once the memory
/// schedule is complete, so each fetch gets its grant; completion is still
/// detected and reported.
pub fn schedule(
    store: &mut XddStore,
    seq: &ContentionSequence,
    s0: &StateVector,
    mut trace: Option<&mut ContentionTrace>,
) -> Result<ContentionResult> {
    assert_eq!(seq.bridges.len(), seq.fes.len(), "one bridge per fetch");
    let lam = store.leaf(seq.bus_latency as i64);
    let rho_me_raw = s0.rho();
    let rho_me = seq.me.request_me(store, rho_me_raw)?;
    if let Some(t) = trace.as_deref_mut() {
        t.push(store, "rho_me0", rho_me_raw);
    }
    let mut me_grant = store.pos_inf();
    let mut rel = store.zero();
    if let Some(t) = trace.as_deref_mut() {
        t.push(store, "me_grant:init", me_grant);
        t.push(store, "rel:init", rel);
    }
    let mut state = s0.clone();
    let mut fe_grants = Vec::with_capacity(seq.fes.len());
    let mut fe_states = Vec::with_capacity(seq.fes.len());
    let mut early_exit_at = None;
    for (i, fe) in seq.fes.iter().enumerate() {
        if early_exit_at.is_none() && !store.contains_leaf(me_grant, ExtTime::PosInf) {
            early_exit_at = Some(i);
        }
        state = state.apply(&seq.bridges[i], store)?;
        fe_states.push(state.clone());
        let ready = state.rho();
        let rho_fe = fe.request(store, ready)?;
        if let Some(t) = trace.as_deref_mut() {
            t.push(store, &format!("rho_fe{}", i + 1), rho_fe);
        }
        let won_me = store.sched_me(rho_me, rho_fe);
        let sched_me = store.oplus(won_me, rel);
        me_grant = store.ominus(me_grant, sched_me);
        if let Some(t) = trace.as_deref_mut() {
            t.push(store, &format!("sched_me0:{}", i + 1), sched_me);
            t.push(store, &format!("me_grant:{}", i + 1), me_grant);
        }
        let sched_fe = store.sched_fe(rho_fe, rho_me);
        let fe_rel = store.otimes(sched_fe, lam)?;
        rel = store.oplus(rel, fe_rel);
        let me_release = store.otimes(me_grant, lam)?;
        let fe_grant = store.ominus(sched_fe, me_release);
        if let Some(t) = trace.as_deref_mut() {
            t.push(store, &format!("sched_fe{}", i + 1), sched_fe);
            t.push(store, &format!("rel:{}", i + 1), rel);
            t.push(store, &format!("fe_grant{}", i + 1), fe_grant);
        }
        fe_grants.push(fe_grant);
        let bump = store.otimes(fe_grant, lam)?;
        let merged = store.oplus(state.rho(), bump);
        state.set_rho(merged);
    }
    let fallback = store.oplus(rel, rho_me);
    me_grant = store.ominus(me_grant, fallback);
    me_grant = seq.me.mask_off_bus(store, me_grant)?;
    if let Some(t) = trace.as_deref_mut() {
        t.push(store, "me_grant:final", me_grant);
    }
    if store.contains_leaf(me_grant, ExtTime::PosInf) {
        return Err(AnalysisError::UnscheduledContention);
    }
    Ok(ContentionResult {
        me_grant,
        fe_grants,
        fe_states,
        final_state: state,
        early_exit_at,
    })
}

/// Default window size: queue room plus stage widths strictly between the
/// fetch stage and the memory stage bound how many fetches can overtake one
/// memory access.
pub fn contention_window(spec: &PipelineSpec) -> usize {
    spec.window_point_cap()
}
