//! Binding from not-classified accesses to event bases, in inventory order.

use std::collections::BTreeMap;

use timing_ir::{AccessKind, BlockId, Cfg, EventSpec};
use xdd::{EventBase, XddStore};

use crate::steps::EventLookup;

/// One event base per not-classified access of a program.
#[derive(Clone, Debug, Default)]
pub struct EventBinding {
    map: BTreeMap<(BlockId, usize, AccessKind), EventBase>,
    specs: Vec<(EventSpec, EventBase)>,
}

impl EventBinding {
    /// Registers bases in inventory order (block, instruction, fetch before
    /// data), which fixes their diagram order for the run.
    pub fn create(store: &mut XddStore, cfg: &Cfg) -> EventBinding {
        let mut binding = EventBinding::default();
        for spec in cfg.event_inventory() {
            let base = store.new_event_base(&spec.name);
            binding
                .map
                .insert((spec.block, spec.instr, spec.kind), base);
            binding.specs.push((spec, base));
        }
        binding
    }

    pub fn iter(&self) -> impl Iterator<Item = &(EventSpec, EventBase)> {
        self.specs.iter()
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }
}

impl EventLookup for EventBinding {
    fn event_base(&self, block: BlockId, instr: usize, kind: AccessKind) -> Option<EventBase> {
        self.map.get(&(block, instr, kind)).copied()
    }
}

/// A lookup with no events at all, for synthetic step programs in tests.
pub struct NoEvents;

impl EventLookup for NoEvents {
    fn event_base(&self, _: BlockId, _: usize, _: AccessKind) -> Option<EventBase> {
        None
    }
}
