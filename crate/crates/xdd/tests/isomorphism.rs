//! Every lifted operator must agree pointwise with the explicit-map view,
//! and every produced diagram must be reduced, ordered, and canonical.

mod common;

use common::{events, random_diagram, table};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use xdd::{BinOp, ExtTime, XddError, XddStore};

fn scalar(op: BinOp, a: ExtTime, b: ExtTime) -> Result<ExtTime, XddError> {
    match op {
        BinOp::Max => Ok(a.max(b)),
        BinOp::Add => a.checked_add(b),
        BinOp::Min => Ok(a.min(b)),
        BinOp::Sub => a.checked_sub(b),
        BinOp::SchedMe => Ok(if a <= b { a } else { ExtTime::PosInf }),
        BinOp::SchedFe => Ok(if a < b { a } else { ExtTime::PosInf }),
    }
}

fn check_op(op: BinOp, rounds: usize, seed: u64, with_inf_rhs: bool) {
    let mut store = XddStore::new();
    let evs = events(&mut store, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..rounds {
        let f = random_diagram(&mut store, &evs, &mut rng, true);
        let g = random_diagram(&mut store, &evs, &mut rng, with_inf_rhs);
        let r = store.apply(op, f, g).unwrap();
        store.check_canonical(r).unwrap();
        let tf = table(&store, f, &evs);
        let tg = table(&store, g, &evs);
        let tr = table(&store, r, &evs);
        for mask in 0..tf.len() {
            assert_eq!(
                tr[mask],
                scalar(op, tf[mask], tg[mask]).unwrap(),
                "{op:?} mismatch at mask {mask}"
            );
        }
    }
}

#[test]
fn max_matches_pointwise_oracle() {
    check_op(BinOp::Max, 200, 11, true);
}

#[test]
fn add_matches_pointwise_oracle() {
    check_op(BinOp::Add, 200, 12, true);
}

#[test]
fn min_matches_pointwise_oracle() {
    check_op(BinOp::Min, 200, 13, true);
}

#[test]
fn sub_matches_pointwise_oracle() {
    // The subtrahend must be finite; infinite leaves are a separate error test.
    check_op(BinOp::Sub, 200, 14, false);
}

#[test]
fn sched_me_matches_pointwise_oracle() {
    check_op(BinOp::SchedMe, 200, 15, true);
}

#[test]
fn sched_fe_matches_pointwise_oracle() {
    check_op(BinOp::SchedFe, 200, 16, true);
}

#[test]
fn sub_rejects_infinite_subtrahend() {
    let mut store = XddStore::new();
    let f = store.leaf(3);
    let inf = store.pos_inf();
    assert_eq!(store.oslash(f, inf), Err(XddError::InfiniteSubtrahend));
    let ninf = store.zero();
    assert_eq!(store.oslash(f, ninf), Err(XddError::InfiniteSubtrahend));
}

#[test]
fn plus_matches_explicit_map_sum() {
    // The same check as above, phrased through explicit-map arithmetic.
    let mut store = XddStore::new();
    let evs = events(&mut store, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for _ in 0..200 {
        let f = random_diagram(&mut store, &evs, &mut rng, true);
        let g = random_diagram(&mut store, &evs, &mut rng, true);
        let mf = store.to_explicit(f, &evs).unwrap();
        let mg = store.to_explicit(g, &evs).unwrap();
        let sum = mf.combine(&mg, |a, b| a.checked_add(b)).unwrap();
        let direct = store.otimes(f, g).unwrap();
        assert_eq!(store.from_explicit(&sum).unwrap(), direct);
    }
}

#[test]
fn round_trip_is_identity() {
    let mut store = XddStore::new();
    let evs = events(&mut store, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..500 {
        let f = random_diagram(&mut store, &evs, &mut rng, true);
        let m = store.to_explicit(f, &evs).unwrap();
        let back = store.from_explicit(&m).unwrap();
        assert_eq!(back, f);
    }
}

#[test]
fn canonicity_identical_tables_identical_handles() {
    let mut store = XddStore::new();
    let evs = events(&mut store, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..200 {
        let f = random_diagram(&mut store, &evs, &mut rng, true);
        let g = random_diagram(&mut store, &evs, &mut rng, true);
        let same_table = table(&store, f, &evs) == table(&store, g, &evs);
        assert_eq!(same_table, f == g);
    }
}

#[test]
fn support_of_combination_is_bounded_by_union() {
    let mut store = XddStore::new();
    let evs = events(&mut store, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..200 {
        let f = random_diagram(&mut store, &evs, &mut rng, true);
        let g = random_diagram(&mut store, &evs, &mut rng, true);
        let r = store.oplus(f, g);
        let mut union = store.support(f);
        union.extend(store.support(g));
        for e in store.support(r) {
            assert!(union.contains(&e));
        }
    }
}

#[test]
fn max_leaf_equals_worst_configuration() {
    let mut store = XddStore::new();
    let evs = events(&mut store, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(27);
    for _ in 0..200 {
        let f = random_diagram(&mut store, &evs, &mut rng, true);
        let worst = table(&store, f, &evs).into_iter().max().unwrap();
        assert_eq!(store.max_leaf(f), worst);
    }
}

#[test]
fn support_of_leaf_is_empty() {
    let mut store = XddStore::new();
    let l = store.leaf(7);
    assert!(store.support(l).is_empty());
}

#[test]
fn memo_clearing_never_changes_results() {
    let mut store = XddStore::new();
    let evs = events(&mut store, 5);
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let pairs: Vec<_> = (0..50)
        .map(|_| {
            (
                random_diagram(&mut store, &evs, &mut rng, true),
                random_diagram(&mut store, &evs, &mut rng, true),
            )
        })
        .collect();
    let before: Vec<_> = pairs
        .iter()
        .map(|&(f, g)| {
            let a = store.oplus(f, g);
            let b = store.otimes(f, g).unwrap();
            let c = store.ominus(f, g);
            (a, b, c)
        })
        .collect();
    store.clear_memos();
    let after: Vec<_> = pairs
        .iter()
        .map(|&(f, g)| {
            let a = store.oplus(f, g);
            let b = store.otimes(f, g).unwrap();
            let c = store.ominus(f, g);
            (a, b, c)
        })
        .collect();
    assert_eq!(before, after);
}
