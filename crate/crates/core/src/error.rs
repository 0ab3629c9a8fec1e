use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ground set of size {p} exceeds the exhaustive cap of {cap}")]
    AboveCap { p: usize, cap: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid set function: {0}")]
    InvalidSetFunction(String),

    #[error("invalid loss: {0}")]
    InvalidLoss(String),

    #[error("set function is not submodular: witness A={set:#b}, i={i}, j={j}, violation {violation:e}")]
    NotSubmodular { set: u128, i: usize, j: usize, violation: f64 },

    #[error("linear program is {status}: {detail}")]
    Lp { status: String, detail: String },

    #[error("invalid configuration: {0}")]
    Config(String),
}
