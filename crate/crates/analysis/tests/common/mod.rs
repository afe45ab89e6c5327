//! Synthetic contention windows shared by the differential tests: given
//! ready diagrams live in dedicated slots; bridges accumulate them into the
//! time pointer so the window chaining flows exactly like a real block.
#![allow(dead_code)]

use std::sync::Arc;

use cfg_analysis::{schedule, BusPoint, ContentionResult, ContentionSequence, ContentionTrace};
use xdd::{
    Configuration, EventId, LayoutBuilder, SlotIndex, SlotLayout, StateVector, TimingPoint,
    TransitionMatrix, XddHandle, XddStore,
};

pub struct SyntheticWindow {
    pub layout: Arc<SlotLayout>,
    pub seq: ContentionSequence,
    pub s0: StateVector,
}

/// Builds a window from explicit ready diagrams. `me_event`/`fe_event[i]`
/// carry the access's own uncertainty (`None` marks always-miss).
pub fn synthetic_window(
    store: &mut XddStore,
    me_ready: XddHandle,
    me_event: Option<EventId>,
    fes: &[(XddHandle, Option<EventId>)],
    bus_latency: u64,
) -> SyntheticWindow {
    let mut lb = LayoutBuilder::new();
    for i in 0..fes.len() {
        lb.add(format!("given:{i}"), TimingPoint::Start);
    }
    let layout = lb.finish();
    let mut s0 = StateVector::initial(&layout, store);
    s0.set_rho(me_ready);
    let mut bridges = Vec::new();
    for (i, &(ready, _)) in fes.iter().enumerate() {
        s0.set(SlotIndex(i as u32), ready);
        let mut m = TransitionMatrix::identity(&layout, store);
        if i == 0 {
            // The first bridge leaves the memory access behind.
            m.compose_reset(store);
        }
        m.compose_wait(SlotIndex(i as u32), store).unwrap();
        bridges.push(m);
    }
    let seq = ContentionSequence {
        me: BusPoint {
            must_use_bus: me_event.is_none(),
            event: me_event,
        },
        fes: fes
            .iter()
            .map(|&(_, e)| BusPoint {
                must_use_bus: e.is_none(),
                event: e,
            })
            .collect(),
        bridges,
        bus_latency,
    };
    SyntheticWindow { layout, seq, s0 }
}

pub fn run_window(
    store: &mut XddStore,
    w: &SyntheticWindow,
    trace: Option<&mut ContentionTrace>,
) -> ContentionResult {
    schedule(store, &w.seq, &w.s0, trace).unwrap()
}

/// Scalar view of one configuration of the window.
pub fn scalar_inputs(
    store: &XddStore,
    w: &SyntheticWindow,
    gamma: &Configuration,
) -> timing_oracle::ContentionInput {
    let me_ready = store.eval(w.s0.rho(), gamma).unwrap();
    let me_uses = match w.seq.me.event {
        None => true,
        Some(e) => gamma.is_active(e).unwrap(),
    };
    let fes = w
        .seq
        .fes
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let ready = store
                .eval(w.s0.get(SlotIndex(i as u32)), gamma)
                .unwrap()
                .value()
                .expect("given readies are finite");
            timing_oracle::FeRequest {
                ready,
                uses_bus: match p.event {
                    None => true,
                    Some(e) => gamma.is_active(e).unwrap(),
                },
            }
        })
        .collect();
    timing_oracle::ContentionInput {
        me_ready: me_ready.value().expect("memory ready is finite"),
        me_uses_bus: me_uses,
        fes,
        bus_latency: w.seq.bus_latency as i64,
    }
}

/// Converts scalar extended times for comparison with diagram leaves.
pub fn as_ext(t: timing_oracle::Time) -> xdd::ExtTime {
    match t {
        timing_oracle::Time::NegInf => xdd::ExtTime::NegInf,
        timing_oracle::Time::Fin(v) => xdd::ExtTime::Finite(v),
        timing_oracle::Time::PosInf => xdd::ExtTime::PosInf,
    }
}
