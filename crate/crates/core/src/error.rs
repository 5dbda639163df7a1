use thiserror::Error;

/// Errors surfaced by every fallible operation in this crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus {0} is not prime")]
    CompositeModulus(u64),

    #[error("elements belong to different fields (GF({left}) vs GF({right}))")]
    FieldMismatch { left: u64, right: u64 },

    #[error("zero has no multiplicative inverse")]
    ZeroInverse,

    #[error("division by zero")]
    DivisionByZero,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("linear system has no solution")]
    NoSolution,

    #[error("zero vector is not a valid state or effect")]
    ZeroVector,

    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),

    #[error("evolution matrix is singular")]
    SingularEvolution,

    #[error("enumeration of {size} candidates exceeds cap {cap}")]
    EnumerationTooLarge { size: u128, cap: u128 },

    #[error("instance with {size} vertices exceeds the hard limit {max}")]
    InstanceTooLarge { size: usize, max: usize },

    #[error("malformed instance: {0}")]
    InvalidInstance(String),

    #[error("malformed table: {0}")]
    MalformedTable(String),

    #[error("no label {0} in this table")]
    UnknownLabel(String),

    #[error("no-signaling equalities are inconsistent")]
    Infeasible,

    #[error("feasible region of the linear program is empty")]
    InfeasibleRegion,

    #[error("anchor cells do not reparametrize the solution space")]
    DegenerateAnchors,

    #[error("solution is not unique: {dimension} degrees of freedom remain")]
    NotUnique { dimension: usize },

    #[error("incomplete block: {0}")]
    IncompleteBlock(String),

    #[error("cannot parse rational from {0:?}")]
    ParseRational(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
