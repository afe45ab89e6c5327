//! Data-driven pipeline model: derives the temporal-state layout and the
//! per-vertex step programs from a pipeline description, and compiles them
//! into transition matrices over the diagram semiring.

pub mod compile;
pub mod events;
pub mod layout;
pub mod steps;

pub use compile::{compile_block, compile_steps, interpret_block, interpret_steps};
pub use events::{EventBinding, NoEvents};
pub use layout::{build_layout, PipelineLayout, Resource, ResourceId, ResourceKind};
pub use steps::{Atom, BlockSteps, BusAccess, EventLookup, Step, StepProgram, VertexSteps};

use thiserror::Error;

#[derive(Error, Debug)]
pub enum PipelineError {
    #[error("unknown resource {name}")]
    UnknownResource { name: String },

    #[error("not-classified access has no bound event")]
    MissingEvent,

    #[error("consume latency {latency} has a negative or infinite leaf")]
    NegativeLatency { latency: String },

    #[error(transparent)]
    Xdd(#[from] xdd::XddError),
}

pub type Result<T> = std::result::Result<T, PipelineError>;
