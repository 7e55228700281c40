use thiserror::Error;

use crate::algebra::VarKey;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range {min}..={max}")]
    IndexOutOfRange { index: usize, min: usize, max: usize },

    #[error("{what} requires n >= {min}, got n = {n}")]
    InvalidDimension { what: &'static str, n: usize, min: usize },

    #[error("division by zero")]
    DivisionByZero,

    #[error("denominator vanishes at the evaluation point")]
    ZeroDenominator,

    #[error("variable {0} has no value in the assignment")]
    Unassigned(VarKey),

    #[error("not enough jet orders to evaluate {0}")]
    InsufficientOrder(VarKey),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("matrix is singular")]
    Singular,

    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("exponents must be nonnegative integers")]
    NonIntegerExponent,

    #[error("type error: {0}")]
    Type(String),

    #[error("unknown group `{0}`")]
    UnknownGroup(String),

    #[error("catalog error: {0}")]
    Catalog(String),

    #[error("expansion exceeds the budget of {0} terms")]
    BudgetExceeded(usize),

    #[error("too many degenerate evaluation points ({0} retries)")]
    RetriesExhausted(usize),
}
