use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("antenna separation {c:.6e} is not attainable (must exceed {bound:.6e})")]
    InfeasibleSeparation { c: f64, bound: f64 },

    #[error("ALC suppression {a:.6e} is not attainable (must exceed {bound:.6e})")]
    InfeasibleAlc { a: f64, bound: f64 },

    #[error("negative duration {0} s")]
    NegativeDuration(f64),

    #[error("negative 3-dB bandwidth {0} Hz")]
    NegativeBeta(f64),

    #[error("active subcarrier set is empty")]
    EmptyActiveSet,

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("no simulation columns")]
    NoSimulationColumns,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}
