use std::fmt;

use crate::scalar::Mode;

/// Errors raised while building or evaluating summability objects.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("weight q_{index} is not positive")]
    NonPositiveWeight { index: usize },

    #[error("invalid weight family: {0}")]
    InvalidWeights(String),

    #[error("singular triangle: diagonal entry ({index}, {index}) is zero")]
    SingularTriangle { index: usize },

    #[error("matrix `{0}` is not lower triangular")]
    NotTriangular(String),

    #[error("scalar mode mismatch: {left} operand combined with {right} operand")]
    ModeMismatch { left: Mode, right: Mode },

    #[error("division by zero")]
    DivisionByZero,

    #[error("invalid rational literal {0:?}")]
    ParseRational(String),

    #[error("invalid truncation policy: {0}")]
    InvalidPolicy(String),

    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("unsupported class pair ({domain}, {codomain})")]
    UnsupportedClass { domain: String, codomain: String },

    #[error("row {row}: series of entries does not converge within the scan window")]
    RowSumDivergence { row: usize },

    #[error("matrix is not a member of the class: condition {condition} {outcome}")]
    NotMember { condition: String, outcome: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exact => f.write_str("exact"),
            Mode::Float => f.write_str("float"),
        }
    }
}
