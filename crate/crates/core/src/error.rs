use thiserror::Error;

use crate::rational::Rational;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("variable name `{0}` is not a valid identifier")]
    InvalidName(String),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("variable `{0}` has an empty domain")]
    EmptyDomain(String),
    #[error("variable `{var}` repeats value label `{label}`")]
    DuplicateLabel { var: String, label: String },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("unknown value `{label}` for variable `{var}`")]
    UnknownValue { var: String, label: String },
    #[error("configuration has {got} values, frame has {expected} variables")]
    ArityMismatch { expected: usize, got: usize },
    #[error("incompatible frames: {0}")]
    IncompatibleFrames(String),
    #[error("frame of {0} configurations is too large to index")]
    FrameTooLarge(u128),
    #[error("the empty set cannot carry mass")]
    EmptyFocal,
    #[error("duplicate focal set {0}")]
    DuplicateFocal(String),
    #[error("masses cannot be normalized: the normalizing sum is zero")]
    NotNormalizable,
    #[error("not a pseudo-belief function: commonality is negative at {0}")]
    NotPseudoBelief(String),
    #[error("subset lattice over {size} configurations exceeds the gate of {gate}")]
    LatticeTooLarge { size: usize, gate: usize },
    #[error("total conflict: every pair of focal sets is disjoint")]
    TotalConflict,
    #[error("removal undefined: K = {0} is not positive")]
    RemovalUndefined(Rational),
    #[error("no anticonditional exists: {0}")]
    NoAnticonditional(String),
    #[error("canonical anticonditional is not a pseudo-belief function: {0}")]
    NoCanonicalMember(String),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}
