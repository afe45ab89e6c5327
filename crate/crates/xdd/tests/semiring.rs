//! Semiring laws for (⊕, ⊗, 0, 1) on sampled diagram triples, by exact
//! handle equality (canonicity makes that the strongest possible check).

mod common;

use common::{events, random_diagram};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use xdd::XddStore;

#[test]
fn semiring_laws_hold_on_samples() {
    let mut store = XddStore::new();
    let evs = events(&mut store, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let zero = store.zero();
    let one = store.one();
    for _ in 0..200 {
        let f = random_diagram(&mut store, &evs, &mut rng, true);
        let g = random_diagram(&mut store, &evs, &mut rng, true);
        let h = random_diagram(&mut store, &evs, &mut rng, true);

        // ⊕: commutative, associative, idempotent, identity 0.
        assert_eq!(store.oplus(f, g), store.oplus(g, f));
        let fg = store.oplus(f, g);
        let gh = store.oplus(g, h);
        assert_eq!(store.oplus(fg, h), store.oplus(f, gh));
        assert_eq!(store.oplus(f, f), f);
        assert_eq!(store.oplus(f, zero), f);

        // ⊗: commutative, associative, identity 1, annihilator 0.
        assert_eq!(store.otimes(f, g).unwrap(), store.otimes(g, f).unwrap());
        let fg = store.otimes(f, g).unwrap();
        let gh = store.otimes(g, h).unwrap();
        assert_eq!(store.otimes(fg, h).unwrap(), store.otimes(f, gh).unwrap());
        assert_eq!(store.otimes(f, one).unwrap(), f);
        assert_eq!(store.otimes(f, zero).unwrap(), zero);

        // ⊗ distributes over ⊕.
        let g_plus_h = store.oplus(g, h);
        let lhs = store.otimes(f, g_plus_h).unwrap();
        let fg = store.otimes(f, g).unwrap();
        let fh = store.otimes(f, h).unwrap();
        let rhs = store.oplus(fg, fh);
        assert_eq!(lhs, rhs);
    }
}
