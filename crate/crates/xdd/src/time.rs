//! Extended time values: integer cycle counts plus the two infinities.

use std::fmt;

use crate::XddError;

/// A time in cycles, extended with `-inf` and `+inf`.
///
/// `-inf` marks "no constraint / not scheduled" and is absorbing for
/// addition; `+inf` marks "not yet scheduled" in contention bookkeeping.
/// The derived order is total: `-inf < ... < -1 < 0 < 1 < ... < +inf`.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExtTime {
    NegInf,
    Finite(i64),
    PosInf,
}

impl ExtTime {
    pub const ZERO: ExtTime = ExtTime::Finite(0);

    pub fn finite(v: i64) -> ExtTime {
        ExtTime::Finite(v)
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtTime::Finite(_))
    }

    /// The finite value, if any.
    pub fn value(self) -> Option<i64> {
        match self {
            ExtTime::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Saturating-free addition. `-inf` absorbs everything (including
    /// `+inf`); otherwise `+inf` absorbs; finite overflow is an error.
    pub fn checked_add(self, rhs: ExtTime) -> Result<ExtTime, XddError> {
        use ExtTime::*;
        match (self, rhs) {
            (NegInf, _) | (_, NegInf) => Ok(NegInf),
            (PosInf, _) | (_, PosInf) => Ok(PosInf),
            (Finite(a), Finite(b)) => a
                .checked_add(b)
                .map(Finite)
                .ok_or(XddError::Overflow { lhs: a, rhs: b }),
        }
    }

    /// Subtraction used by rebasing. The subtrahend must be finite:
    /// rebasing to an infinite origin is not reversible.
    pub fn checked_sub(self, rhs: ExtTime) -> Result<ExtTime, XddError> {
        use ExtTime::*;
        match (self, rhs) {
            (_, NegInf) | (_, PosInf) => Err(XddError::InfiniteSubtrahend),
            (NegInf, _) => Ok(NegInf),
            (PosInf, _) => Ok(PosInf),
            (Finite(a), Finite(b)) => a
                .checked_sub(b)
                .map(Finite)
                .ok_or(XddError::Overflow { lhs: a, rhs: -b }),
        }
    }

    pub fn max(self, rhs: ExtTime) -> ExtTime {
        std::cmp::max(self, rhs)
    }

    pub fn min(self, rhs: ExtTime) -> ExtTime {
        std::cmp::min(self, rhs)
    }
}

impl From<i64> for ExtTime {
    fn from(v: i64) -> ExtTime {
        ExtTime::Finite(v)
    }
}

impl fmt::Display for ExtTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtTime::NegInf => write!(f, "-inf"),
            ExtTime::Finite(v) => write!(f, "{v}"),
            ExtTime::PosInf => write!(f, "+inf"),
        }
    }
}

impl fmt::Debug for ExtTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
