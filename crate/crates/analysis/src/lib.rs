//! Whole-program pipeline timing analysis: propagates sets of temporal
//! states through the control-flow graph with pre-compiled block matrices,
//! schedules shared-bus contention exactly per configuration, rebases the
//! timeline at block exits, and distinguishes loop iterations by event
//! generation numbers.

pub mod analysis;
pub mod blocks;
pub mod contention;

pub use analysis::{Analysis, AnalyzeOpts, Analyzer, BlockOutcome, BlockTiming, StateSet};
pub use blocks::{
    apply_block, find_contention_points, group_windows, plan_block, ApplyMode, BlockPlan,
    ContentionPoint, WindowSpec,
};
pub use contention::{
    contention_window, schedule, BusPoint, ContentionResult, ContentionSequence, ContentionTrace,
};

use thiserror::Error;

#[derive(Error, Debug)]
pub enum AnalysisError {
    #[error(transparent)]
    Xdd(#[from] xdd::XddError),

    #[error(transparent)]
    Pipeline(#[from] pipeline_model::PipelineError),

    #[error("conditional bus access has no event")]
    MissingEvent,

    #[error("a bus access remained unscheduled (+inf in a grant diagram)")]
    UnscheduledContention,

    #[error("state sets mix different time bases ({left} vs {right})")]
    BaseMismatch { left: u64, right: u64 },

    #[error("iteration budget exhausted at block {block} ({budget} applications)")]
    IterationBudget { block: String, budget: usize },

    #[error("state-set cap exceeded at block {block}: {states} states (cap {budget})")]
    StateBudget {
        block: String,
        states: usize,
        budget: usize,
    },
}

pub type Result<T> = std::result::Result<T, AnalysisError>;
