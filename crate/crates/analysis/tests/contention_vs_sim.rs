//! The window schedule over diagrams must match the scalar first-come-
//! first-served simulator on every configuration, and the worked two-fetch
//! scenario must reproduce its traced intermediate diagrams.

mod common;

use common::{as_ext, run_window, scalar_inputs, synthetic_window};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use timing_oracle::simulate_contention;
use xdd::{Configuration, EventId, ExtTime, XddHandle, XddStore};

fn random_ready(
    store: &mut XddStore,
    events: &[EventId],
    rng: &mut ChaCha8Rng,
) -> XddHandle {
    let mut h = store.leaf(rng.gen_range(0..=12));
    for &e in events {
        if rng.gen_bool(0.35) {
            let lo = store.leaf(rng.gen_range(0..=12));
            let hi = store.leaf(rng.gen_range(0..=12));
            let node = store.mk_node(e, lo, hi).unwrap_or(lo);
            h = store.oplus(h, node);
        }
    }
    h
}

fn check_window(store: &mut XddStore, w: &common::SyntheticWindow, all_events: &[EventId]) {
    let result = run_window(store, w, None);
    for mask in 0..(1u64 << all_events.len()) {
        let gamma = Configuration::from_mask(all_events, mask);
        let sim = simulate_contention(&scalar_inputs(store, w, &gamma));
        assert_eq!(
            store.eval(result.me_grant, &gamma).unwrap(),
            as_ext(sim.me_grant),
            "memory grant diverges at mask {mask}"
        );
        for (i, &g) in result.fe_grants.iter().enumerate() {
            assert_eq!(
                store.eval(g, &gamma).unwrap(),
                as_ext(sim.fe_grants[i]),
                "fetch {i} grant diverges at mask {mask}"
            );
        }
    }
}

#[test]
fn random_windows_match_the_scalar_simulator() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for round in 0..300 {
        let mut store = XddStore::new();
        let n = rng.gen_range(0..=4usize);
        // Up to 4 events split between access conditions and ready diagrams.
        let bases: Vec<_> = (0..4).map(|i| store.new_event_base(&format!("e{i}"))).collect();
        let events: Vec<EventId> = bases.iter().map(|&b| store.event(b, 0)).collect();
        let mut free = events.clone();
        let me_event = if rng.gen_bool(0.5) && !free.is_empty() {
            Some(free.remove(0))
        } else {
            None
        };
        let fes: Vec<(XddHandle, Option<EventId>)> = (0..n)
            .map(|_| {
                let ev = if rng.gen_bool(0.5) && !free.is_empty() {
                    Some(free.remove(0))
                } else {
                    None
                };
                // Ready diagrams draw only on events not used as conditions.
                let ready = random_ready(&mut store, &free.clone(), &mut rng);
                (ready, ev)
            })
            .collect();
        let me_ready = random_ready(&mut store, &free, &mut rng);
        let w = synthetic_window(&mut store, me_ready, me_event, &fes, 9);
        check_window(&mut store, &w, &events);
        let _ = round;
    }
}

#[test]
fn always_miss_tie_gives_memory_side_the_bus() {
    let mut store = XddStore::new();
    let me_ready = store.leaf(3);
    let fe_ready = store.leaf(3);
    let w = synthetic_window(&mut store, me_ready, None, &[(fe_ready, None)], 9);
    let result = run_window(&mut store, &w, None);
    assert_eq!(store.compact(result.me_grant), "3");
    // The fetch gets the bus when the memory side releases it: 3 + 9.
    assert_eq!(store.compact(result.fe_grants[0]), "12");
}

#[test]
fn worked_two_fetch_scenario_reproduces_traced_diagrams() {
    let mut store = XddStore::new();
    let ep_base = store.new_event_base("ep");
    let ic1_base = store.new_event_base("ic1");
    let ep = store.event(ep_base, 0);
    let ic1 = store.event(ic1_base, 0);
    // Memory access always uses the bus; its readiness depends on an earlier
    // event. First fetch is conditional on ic1 (ready 2), second always
    // misses (ready 5). Bus latency 9.
    let l3 = store.leaf(3);
    let l6 = store.leaf(6);
    let me_ready = store.mk_node(ep, l3, l6).unwrap();
    let fe1 = store.leaf(2);
    let fe2 = store.leaf(5);
    let w = synthetic_window(
        &mut store,
        me_ready,
        None,
        &[(fe1, Some(ic1)), (fe2, None)],
        9,
    );
    let mut trace = cfg_analysis::ContentionTrace::default();
    let result = run_window(&mut store, &w, Some(&mut trace));

    // Final grants, per configuration (checked against the simulator too).
    assert_eq!(store.compact(result.me_grant), "ep[0](ic1[0](3, 11), ic1[0](14, 11))");
    assert_eq!(store.compact(result.fe_grants[0]), "ic1[0](-inf, 2)");
    assert_eq!(
        store.compact(result.fe_grants[1]),
        "ep[0](ic1[0](12, 20), ic1[0](5, 20))"
    );
    common_check(&mut store, &w, &[ep, ic1], &result);

    // The trace walks every intermediate diagram in computation order.
    let rendered: Vec<String> = trace
        .entries
        .iter()
        .map(|(label, what, diagram)| format!("{label} {what} = {diagram}"))
        .collect();
    let expected = [
        "(a) rho_me0 = ep[0](3, 6)",
        "(b) me_grant:init = +inf",
        "(c) rel:init = -inf",
        "(d) rho_fe1 = ic1[0](-inf, 2)",
        "(e) sched_me0:1 = +inf",
        "(f) me_grant:1 = +inf",
        "(g) sched_fe1 = ic1[0](-inf, 2)",
        "(h) rel:1 = ic1[0](-inf, 11)",
        "(i) fe_grant1 = ic1[0](-inf, 2)",
        "(j) rho_fe2 = ic1[0](5, 11)",
        "(k) sched_me0:2 = ep[0](ic1[0](3, 11), ic1[0](+inf, 11))",
        "(l) me_grant:2 = ep[0](ic1[0](3, 11), ic1[0](+inf, 11))",
        "(m) sched_fe2 = ep[0](+inf, ic1[0](5, +inf))",
        "(n) rel:2 = ep[0](+inf, ic1[0](14, +inf))",
        "(o) fe_grant2 = ep[0](ic1[0](12, 20), ic1[0](5, 20))",
        "(p) me_grant:final = ep[0](ic1[0](3, 11), ic1[0](14, 11))",
    ];
    assert_eq!(rendered, expected, "trace drifted:\n{}", rendered.join("\n"));
}

fn common_check(
    store: &mut XddStore,
    w: &common::SyntheticWindow,
    events: &[EventId],
    result: &cfg_analysis::ContentionResult,
) {
    for mask in 0..(1u64 << events.len()) {
        let gamma = Configuration::from_mask(events, mask);
        let sim = simulate_contention(&scalar_inputs(store, w, &gamma));
        assert_eq!(
            store.eval(result.me_grant, &gamma).unwrap(),
            as_ext(sim.me_grant)
        );
        for (i, &g) in result.fe_grants.iter().enumerate() {
            assert_eq!(store.eval(g, &gamma).unwrap(), as_ext(sim.fe_grants[i]));
        }
    }
}

#[test]
fn off_bus_configurations_never_touch_release_times() {
    let mut store = XddStore::new();
    let b = store.new_event_base("ic");
    let ic = store.event(b, 0);
    let me_ready = store.leaf(7);
    let fe_ready = store.leaf(1);
    let w = synthetic_window(&mut store, me_ready, None, &[(fe_ready, Some(ic))], 9);
    let result = run_window(&mut store, &w, None);
    // Off the bus: grant is -inf; on the bus: granted at 1 before the memory
    // access. The memory grant reflects both cases.
    assert_eq!(store.compact(result.fe_grants[0]), "ic[0](-inf, 1)");
    assert_eq!(store.compact(result.me_grant), "ic[0](7, 10)");
    let mut off = Configuration::new();
    off.set(ic, false);
    assert_eq!(
        store.eval(result.fe_grants[0], &off).unwrap(),
        ExtTime::NegInf
    );
}
