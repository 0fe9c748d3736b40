use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("not a valid state: {0}")]
    InvalidState(String),
    #[error("not a valid channel: {0}")]
    InvalidChannel(String),
    #[error("map is not Hermitian-preserving: {0}")]
    NotHermitianPreserving(String),
    #[error("map is not trace-annihilating: residual {0:e}")]
    NotTraceAnnihilating(f64),
    #[error("map is zero")]
    ZeroMap,
    #[error("probe state is not faithful: rank {rank} < {required}")]
    NotFaithful { rank: usize, required: usize },
    #[error("numerical verification failed: {0}")]
    Verification(String),
}

pub type Result<T> = std::result::Result<T, Error>;
