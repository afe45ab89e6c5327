//! Helpers shared by the pipeline-model test suites.
#![allow(dead_code)] // each suite uses its own subset

use rand::prelude::*;
use timing_ir::{AccessKind, BlockId, Classification, InstrClass, InstructionDescriptor};
use xdd::{EventBase, StateVector, XddHandle, XddStore};

use pipeline_model::{EventLookup, PipelineLayout};

/// Event binding over one instruction list, for tests that skip program files.
#[derive(Default)]
pub struct ListEvents {
    pub map: std::collections::BTreeMap<(usize, AccessKind), EventBase>,
}

impl ListEvents {
    pub fn create(store: &mut XddStore, instrs: &[InstructionDescriptor]) -> ListEvents {
        let mut map = std::collections::BTreeMap::new();
        for (i, instr) in instrs.iter().enumerate() {
            if instr.fetch == Classification::NotClassified {
                map.insert(
                    (i, AccessKind::Fetch),
                    store.new_event_base(&format!("ic@{i}")),
                );
            }
            if instr.data == Some(Classification::NotClassified) {
                map.insert(
                    (i, AccessKind::Data),
                    store.new_event_base(&format!("dc@{i}")),
                );
            }
        }
        ListEvents { map }
    }
}

impl EventLookup for ListEvents {
    fn event_base(&self, _: BlockId, instr: usize, kind: AccessKind) -> Option<EventBase> {
        self.map.get(&(instr, kind)).copied()
    }
}

pub fn random_class(rng: &mut impl Rng) -> InstrClass {
    *InstrClass::ALL.choose(rng).unwrap()
}

pub fn random_classification(rng: &mut impl Rng) -> Classification {
    match rng.gen_range(0..3) {
        0 => Classification::AlwaysHit,
        1 => Classification::AlwaysMiss,
        _ => Classification::NotClassified,
    }
}

pub fn random_instr(rng: &mut impl Rng, uid: u32) -> InstructionDescriptor {
    let class = random_class(rng);
    let nreads = rng.gen_range(0..3);
    let nwrites = rng.gen_range(0..2);
    let reads = (0..nreads).map(|_| rng.gen_range(0..8u8)).collect();
    let writes = (0..nwrites).map(|_| rng.gen_range(0..8u8)).collect();
    InstructionDescriptor {
        uid,
        class,
        reads,
        writes,
        fetch: random_classification(rng),
        data: class.uses_memory().then(|| random_classification(rng)),
    }
}

/// A random state: mostly small leaves, occasionally an event node.
pub fn random_state(
    store: &mut XddStore,
    layout: &PipelineLayout,
    events: &[xdd::EventId],
    rng: &mut impl Rng,
) -> StateVector {
    let mut s = StateVector::initial(layout.slots(), store);
    for (i, _) in layout.slots().slots() {
        let h: XddHandle = if !events.is_empty() && rng.gen_bool(0.2) {
            let e = events[rng.gen_range(0..events.len())];
            let lo = store.leaf(rng.gen_range(0..10));
            let hi = store.leaf(rng.gen_range(0..10));
            store.mk_node(e, lo, hi).unwrap_or(lo)
        } else if rng.gen_bool(0.15) {
            store.zero()
        } else {
            store.leaf(rng.gen_range(0..16))
        };
        s.set(i, h);
    }
    s
}
