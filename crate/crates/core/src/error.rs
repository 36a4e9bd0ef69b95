use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("basis index must be at least 1, got {0}")]
    InvalidIndex(usize),

    #[error("point {0} lies outside [0, 1]")]
    Domain(f64),

    #[error("operation requires a step system (Walsh-Paley or Haar)")]
    UnsupportedSystem,

    #[error("malformed function: {0}")]
    MalformedFunction(String),

    #[error("function is not absolutely continuous: jump of {jump} at x = {at}")]
    NotAbsolutelyContinuous { at: f64, jump: f64 },

    #[error("weight sequence covers {available} indices but {needed} are required")]
    InsufficientWeights { needed: usize, available: usize },

    #[error("B_n needs n >= 2 (got n = {0})")]
    Degenerate(usize),

    #[error("ramp index {i} must lie in [1, {}]", .n - 1)]
    RampIndex { n: usize, i: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
