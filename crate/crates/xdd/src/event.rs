//! Events: the Boolean micro-architectural uncertainties labelling diagram nodes.
//!
//! An event base is tied to one instruction access (e.g. the instruction-cache
//! access of a given fetch); inside loops the same base reappears with
//! incremented generation numbers. The pair (base, generation) is interned to
//! one [`EventId`] whose order key fixes its level in every diagram of the run.

/// One access that may raise an event; created once per not-classified access.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct EventBase(pub(crate) u32);

impl EventBase {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// An interned (base, generation) pair. Identity is store-wide.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct EventId(pub(crate) u32);

impl EventId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug)]
pub(crate) struct BaseInfo {
    pub name: String,
}

#[derive(Clone, Debug)]
pub(crate) struct EventInfo {
    pub base: EventBase,
    pub generation: u32,
    /// Diagram level: generation ascending, then base creation order.
    /// Smaller keys sit closer to the root.
    pub order: u64,
}

pub(crate) fn order_key(generation: u32, base: EventBase) -> u64 {
    ((generation as u64) << 32) | base.0 as u64
}
