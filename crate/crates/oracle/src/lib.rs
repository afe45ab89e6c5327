//! Independent scalar reference implementations used by property tests and
//! the `--oracle-check` mode: execution-graph solving straight from the
//! dependency timing rule, first-come-first-served bus simulation, and
//! exhaustive (path x configuration) enumeration.
//!
//! This crate never touches the diagram machinery; it shares only the input
//! data model.

pub mod bus;
pub mod run;
pub mod xg;

pub use bus::{simulate_contention, ContentionInput, ContentionSchedule, FeRequest};
pub use run::{enumerate, enumerate_paths, solve_path, DynAccess, Enumeration, PathInfo};
pub use xg::{solve_xg, ScalarXg, XgEdge, XgVertex};

use std::fmt;

use thiserror::Error;

#[derive(Error, Debug)]
pub enum OracleError {
    #[error("execution graph has a cycle")]
    Cyclic,

    #[error("enumeration guard exceeded: {pairs} path x configuration pairs (limit {limit})")]
    GuardExceeded { pairs: u64, limit: u64 },
}

pub type Result<T> = std::result::Result<T, OracleError>;

/// Scalar extended time, mirroring the extended-integer leaf domain.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Time {
    NegInf,
    Fin(i64),
    PosInf,
}

impl Time {
    pub fn add(self, rhs: Time) -> Time {
        use Time::*;
        match (self, rhs) {
            (NegInf, _) | (_, NegInf) => NegInf,
            (PosInf, _) | (_, PosInf) => PosInf,
            (Fin(a), Fin(b)) => Fin(a + b),
        }
    }

    pub fn add_fin(self, rhs: i64) -> Time {
        self.add(Time::Fin(rhs))
    }

    pub fn max(self, rhs: Time) -> Time {
        std::cmp::max(self, rhs)
    }

    pub fn min(self, rhs: Time) -> Time {
        std::cmp::min(self, rhs)
    }

    pub fn fin(self) -> Option<i64> {
        match self {
            Time::Fin(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Time::NegInf => write!(f, "-inf"),
            Time::Fin(v) => write!(f, "{v}"),
            Time::PosInf => write!(f, "+inf"),
        }
    }
}
