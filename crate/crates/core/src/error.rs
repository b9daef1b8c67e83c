use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degree {degree} exceeds the allowed maximum {max}")]
    DegreeOverflow { degree: i64, max: i64 },

    #[error("pullback matrix is singular")]
    SingularPullback,

    #[error("pullback matrix must be {n}x{n}")]
    PullbackShape { n: usize },

    #[error("invalid metric signature: {0}")]
    InvalidSignature(String),

    #[error("index {index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("matrix is not normal with respect to the delta-space scalar product")]
    NonNormal,

    #[error("operators {first} and {second} do not commute; commutator = {commutator}")]
    NonCommuting {
        first: usize,
        second: usize,
        commutator: String,
    },

    #[error("no residue registered for operator {0}")]
    MissingResidue(String),

    #[error("operator must have essential order 0, found {0}")]
    NotOrderZero(u32),

    #[error("hypothesis failed: {0}")]
    HypothesisFailure(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("vanishing denominator n+2k-2p-2q-4 at p={p}, q={q}")]
    ZeroDenominator { p: u32, q: u32 },

    #[error("normalization constant c must be nonzero")]
    ZeroNormalization,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
