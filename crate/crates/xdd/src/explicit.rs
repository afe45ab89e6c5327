//! Explicit configuration-to-time maps, the uncompressed counterpart of a
//! diagram. Conversion both ways is lossless on a declared finite support.

use std::collections::BTreeMap;

use crate::event::EventId;
use crate::store::{XddHandle, XddStore};
use crate::time::ExtTime;
use crate::XddError;

/// Explicit maps are capped here; beyond this the table is no longer a
/// reasonable oracle.
pub const MAX_SUPPORT: usize = 20;

/// One activation choice per event of a declared support.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Configuration {
    active: BTreeMap<EventId, bool>,
}

impl Configuration {
    pub fn new() -> Configuration {
        Configuration::default()
    }

    /// Builds the configuration for `mask` over `events`: bit `i` set means
    /// `events[i]` is active.
    pub fn from_mask(events: &[EventId], mask: u64) -> Configuration {
        let mut c = Configuration::new();
        for (i, &e) in events.iter().enumerate() {
            c.set(e, mask & (1 << i) != 0);
        }
        c
    }

    pub fn set(&mut self, e: EventId, active: bool) -> &mut Self {
        self.active.insert(e, active);
        self
    }

    /// `None` when the event is outside the declared support.
    pub fn is_active(&self, e: EventId) -> Option<bool> {
        self.active.get(&e).copied()
    }

    pub fn events(&self) -> impl Iterator<Item = (EventId, bool)> + '_ {
        self.active.iter().map(|(&e, &a)| (e, a))
    }
}

/// Total map from configurations over `events` to times. `values[mask]`
/// follows the bit convention of [`Configuration::from_mask`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplicitMap {
    events: Vec<EventId>,
    values: Vec<ExtTime>,
}

impl ExplicitMap {
    /// `events` must be sorted by diagram order; `values.len() == 2^events.len()`.
    pub fn new(events: Vec<EventId>, values: Vec<ExtTime>) -> Result<ExplicitMap, XddError> {
        if events.len() > MAX_SUPPORT {
            return Err(XddError::SupportTooLarge {
                size: events.len(),
            });
        }
        if values.len() != 1usize << events.len() {
            return Err(XddError::BadExplicitSize {
                events: events.len(),
                values: values.len(),
            });
        }
        Ok(ExplicitMap { events, values })
    }

    pub fn events(&self) -> &[EventId] {
        &self.events
    }

    pub fn values(&self) -> &[ExtTime] {
        &self.values
    }

    pub fn get(&self, mask: u64) -> ExtTime {
        self.values[mask as usize]
    }

    /// Pointwise combination without touching any diagram machinery.
    pub fn combine(
        &self,
        other: &ExplicitMap,
        op: impl Fn(ExtTime, ExtTime) -> Result<ExtTime, XddError>,
    ) -> Result<ExplicitMap, XddError> {
        assert_eq!(self.events, other.events, "combine requires one support");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| op(a, b))
            .collect::<Result<Vec<_>, _>>()?;
        ExplicitMap::new(self.events.clone(), values)
    }
}

impl XddStore {
    /// Expands `f` over `support`, which must cover every event of `f` and is
    /// kept in diagram order.
    pub fn to_explicit(
        &self,
        f: XddHandle,
        support: &[EventId],
    ) -> Result<ExplicitMap, XddError> {
        if support.len() > MAX_SUPPORT {
            return Err(XddError::SupportTooLarge {
                size: support.len(),
            });
        }
        let mut events: Vec<EventId> = support.to_vec();
        events.sort_by_key(|&e| self.event_order(e));
        events.dedup();
        for e in self.support(f) {
            if !events.contains(&e) {
                return Err(XddError::UndefinedEvent {
                    event: self.event_name(e),
                });
            }
        }
        let mut values = Vec::with_capacity(1 << events.len());
        for mask in 0..(1u64 << events.len()) {
            let gamma = Configuration::from_mask(&events, mask);
            values.push(self.eval(f, &gamma)?);
        }
        ExplicitMap::new(events, values)
    }

    /// Builds the canonical reduced diagram of an explicit map.
    pub fn from_explicit(&mut self, m: &ExplicitMap) -> Result<XddHandle, XddError> {
        let events = m.events();
        let sorted = events
            .windows(2)
            .all(|w| self.event_order(w[0]) < self.event_order(w[1]));
        if !sorted {
            return Err(XddError::UnsortedSupport);
        }
        self.from_explicit_rec(events, m.values())
    }

    fn from_explicit_rec(
        &mut self,
        events: &[EventId],
        values: &[ExtTime],
    ) -> Result<XddHandle, XddError> {
        match events.split_first() {
            None => Ok(self.mk_leaf(values[0])),
            Some((&e, rest)) => {
                // Bit 0 of the mask belongs to the first (root-most) event.
                let lo_vals: Vec<ExtTime> = values.iter().step_by(2).copied().collect();
                let hi_vals: Vec<ExtTime> = values.iter().skip(1).step_by(2).copied().collect();
                let lo = self.from_explicit_rec(rest, &lo_vals)?;
                let hi = self.from_explicit_rec(rest, &hi_vals)?;
                self.mk_node(e, lo, hi)
            }
        }
    }
}
