use thiserror::Error;

/// Error type shared by every module in the crate.
#[derive(Debug, Error)]
pub enum CalibraError {
    #[error("algebra level mismatch")]
    LevelMismatch,
    #[error("unsupported algebra level {0}: the doubling stops being normed past the octonions")]
    UnsupportedLevel(u8),
    #[error("operation requires algebra level {required}, got {got}")]
    RequiresLevel { required: u8, got: u8 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("grade mismatch: {0}")]
    GradeMismatch(String),
    #[error("invalid complex-structure generator")]
    InvalidGenerator,
    #[error("not middle dimensional")]
    NotMiddleDimensional,
    #[error("singular lattice")]
    SingularLattice,
    #[error("stale witness: {0}")]
    StaleWitness(String),
    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, CalibraError>;
