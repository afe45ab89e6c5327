//! Execution decision diagrams.
//!
//! Reduced, ordered, hash-consed decision diagrams whose internal nodes carry
//! micro-architectural events and whose leaves carry extended times. Equipped
//! with `⊕` (max) and `⊗` (plus) the diagrams form a semiring with
//! `0 = LEAF(-inf)` and `1 = LEAF(0)`; [`StateVector`] and
//! [`TransitionMatrix`] build max-plus linear algebra on top of it. The
//! remaining operators (`min`, subtraction, and the two bus scheduling
//! comparisons) are pointwise liftings as well.
//!
//! Everything is driven through a single mutable [`XddStore`]; the analysis
//! is single-threaded and the store is not synchronized.

mod algebra;
mod event;
mod explicit;
mod store;
mod text;
mod time;

pub use algebra::{
    LayoutBuilder, SlotIndex, SlotInfo, SlotLayout, StateVector, TimingPoint, TransitionMatrix,
};
pub use event::{EventBase, EventId};
pub use explicit::{Configuration, ExplicitMap, MAX_SUPPORT};
pub use store::{BinOp, ShiftOp, XddHandle, XddNode, XddStore};
pub use time::ExtTime;

use thiserror::Error;

/// Errors raised by diagram construction and the operator suite.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum XddError {
    #[error("finite time arithmetic overflow ({lhs} + {rhs})")]
    Overflow { lhs: i64, rhs: i64 },

    #[error("subtraction with an infinite subtrahend")]
    InfiniteSubtrahend,

    #[error("event {event} would violate the diagram order")]
    OrderViolation { event: String },

    #[error("diagram is not reduced")]
    NotReduced,

    #[error("configuration does not define event {event}")]
    UndefinedEvent { event: String },

    #[error("support of {size} events exceeds the explicit-map limit")]
    SupportTooLarge { size: usize },

    #[error("explicit map over {events} events needs 2^{events} values, got {values}")]
    BadExplicitSize { events: usize, values: usize },

    #[error("explicit-map support is not in diagram order")]
    UnsortedSupport,

    #[error("slot index {index} out of range for layout")]
    SlotOutOfRange { index: usize },

    #[error("operands belong to different slot layouts")]
    LayoutMismatch,
}
