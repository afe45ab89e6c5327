//! Shared helpers for the diagram test suites.
#![allow(dead_code)] // each suite uses its own subset

use rand::prelude::*;
use xdd::{Configuration, EventId, ExplicitMap, ExtTime, XddHandle, XddStore};

/// Registers `n` generation-0 events named e0..e(n-1).
pub fn events(store: &mut XddStore, n: usize) -> Vec<EventId> {
    (0..n)
        .map(|i| {
            let b = store.new_event_base(&format!("e{i}"));
            store.event(b, 0)
        })
        .collect()
}

/// Draws a leaf from [-20, 20] with occasional infinities.
pub fn random_leaf(rng: &mut impl Rng, with_inf: bool) -> ExtTime {
    if with_inf {
        match rng.gen_range(0..10) {
            0 => return ExtTime::NegInf,
            1 => return ExtTime::PosInf,
            _ => {}
        }
    }
    ExtTime::Finite(rng.gen_range(-20..=20))
}

/// Builds a random diagram over a random subset of `events` by sampling a
/// full explicit table and canonicalizing it.
pub fn random_diagram(
    store: &mut XddStore,
    events: &[EventId],
    rng: &mut impl Rng,
    with_inf: bool,
) -> XddHandle {
    let chosen: Vec<EventId> = events
        .iter()
        .copied()
        .filter(|_| rng.gen_bool(0.7))
        .collect();
    let values: Vec<ExtTime> = (0..(1u64 << chosen.len()))
        .map(|_| random_leaf(rng, with_inf))
        .collect();
    let map = ExplicitMap::new(chosen, values).unwrap();
    store.from_explicit(&map).unwrap()
}

/// Evaluates `f` on every configuration over `support` and returns the
/// resulting table, mask-indexed.
pub fn table(store: &XddStore, f: XddHandle, support: &[EventId]) -> Vec<ExtTime> {
    (0..(1u64 << support.len()))
        .map(|mask| {
            let gamma = Configuration::from_mask(support, mask);
            store.eval(f, &gamma).unwrap()
        })
        .collect()
}
