use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid exponent {0}: must be at least 1")]
    InvalidExponent(f64),

    #[error("invalid measure space: {0}")]
    InvalidSpace(String),

    #[error("elements live on different measure spaces")]
    SpaceMismatch,

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("invalid substructure: {0}")]
    InvalidSubStructure(String),

    #[error("{name} = {value} outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("improper function: {0}")]
    Improper(String),

    #[error("point {0} outside the domain")]
    OutsideDomain(f64),

    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("variable x{index} out of range for arity {arity}")]
    VariableOutOfRange { index: usize, arity: usize },

    #[error("arity mismatch: term has arity {expected}, got {found} arguments")]
    ArityMismatch { expected: usize, found: usize },

    #[error("points must be distinct")]
    CoincidentPoints,

    #[error("point is not on the unit sphere")]
    NotOnSphere,

    #[error("unknown function {0:?}")]
    UnknownFunction(String),

    #[error("approximation stalled at error {best_error} (target {target})")]
    ApproximationStalled { best_error: f64, target: f64 },

    #[error("grid must be nonempty and strictly inside (0, 1)")]
    InvalidGrid,

    #[error("{0}")]
    InvalidParameter(String),

    #[error("value {value} at atom {atom} is not on the grid; nearest grid value is {rounded}")]
    OffGrid { atom: usize, value: f64, rounded: f64 },

    #[error("value {value} at atom {atom} is not an indicator")]
    NotIndicator { atom: usize, value: f64 },

    #[error("element is not measurable with respect to the conditioning blocks (block {0})")]
    NotMeasurable(usize),

    #[error("block {block} carries {support} distinct values; moments up to order {max_k} cannot separate them")]
    InsufficientMoments {
        block: usize,
        support: usize,
        max_k: usize,
    },

    #[error("vector is not in the subspace")]
    NotInSubspace,

    #[error("subspace basis is not orthonormal")]
    NotOrthonormal,

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("invalid document at {pointer}: {message}")]
    Document { pointer: String, message: String },

    #[error("empty input: {0}")]
    Empty(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
