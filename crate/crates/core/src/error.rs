use thiserror::Error;

use crate::geom::{Axis, PointId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("duplicate {axis:?} coordinate between points {a} and {b}")]
    DegenerateInput { axis: Axis, a: PointId, b: PointId },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("bad parameters: {0}")]
    BadParams(String),

    #[error("instance has {n} points, above the cap of {cap}")]
    TooLarge { n: usize, cap: usize },

    #[error("query ranges violate the boundary precondition: {0}")]
    InvalidRanges(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("inconsistent adversary state: {0}")]
    InconsistentState(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
