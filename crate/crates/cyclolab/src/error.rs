use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid modulus: {0}")]
    InvalidModulus(String),
    #[error("invalid scale {scale}: {reason}")]
    InvalidScale { scale: u64, reason: String },
    #[error("invalid fiber direction: prime index {dir} does not divide scale {scale}")]
    InvalidDirection { dir: usize, scale: u64 },
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u64, u64),
    #[error("Phi_{scale} does not divide the multiset")]
    NotDivisible { scale: u64 },
    #[error("missing required divisor Phi_{scale}")]
    MissingDivisor { scale: u64 },
    #[error("negative weights not allowed here")]
    NegativeInput,
    #[error("zero multiset has no divisor set")]
    ZeroMultiset,
    #[error("weight arithmetic overflow: {0}")]
    WeightOverflow(String),
    #[error("cap exceeded: {0}")]
    CapExceeded(String),
    #[error("cuboid enumeration too large, use the remainder method")]
    UseRemainderMethod,
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
