use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("{value} has no inverse modulo {q}")]
    NoInverse { value: u64, q: u64 },
    #[error("no primitive {m}-th root of unity modulo {q} ({m} does not divide {q} - 1)")]
    NoRoot { m: u64, q: u64 },
    #[error("state construction failed: {0}")]
    Construction(String),
    #[error("register index {index} out of range for {registers} registers")]
    IndexOutOfRange { index: usize, registers: usize },
    #[error("dense state of {requested} amplitudes exceeds the cap of {cap}")]
    SizeCap { requested: u128, cap: u64 },
    #[error("norm drifted to {norm} after {operation}")]
    NormViolation { operation: &'static str, norm: f64 },
    #[error("engine mismatch: {0}")]
    EngineMismatch(String),
    #[error("unsupported noise model: {0}")]
    UnsupportedModel(String),
    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
