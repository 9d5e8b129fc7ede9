use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("ordering cone is the whole space (its negative dual cone is {{0}})")]
    TrivialDualCone,

    #[error("direction is not in the negative dual cone minus the origin: {0}")]
    NotInDualCone(String),

    #[error("operands live over different ordering cones")]
    ConeMismatch,

    #[error("empty family")]
    EmptyFamily,

    #[error("operation requires convex operands: {0}")]
    NonConvexOperand(String),

    #[error("negative scaling factor {0}")]
    NegativeScale(String),

    #[error("unsupported for this map body: {0}")]
    Unsupported(String),

    #[error("regularity precondition violated: {0}")]
    RegularityViolated(String),

    #[error("unknown fixture {0:?}")]
    UnknownFixture(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
