use thiserror::Error;

use crate::config::Outcome;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unlikely post-selection on |{outcome}>: P = {probability:e} (weak values diverge)")]
    UnlikelyPostSelection { outcome: Outcome, probability: f64 },

    #[error("time arguments must be ordered (t1 < t2), got t1 = {t1}, t2 = {t2}")]
    TimeOrdering { t1: f64, t2: f64 },

    #[error("initial qubit state is not normalized: trace = {0}")]
    NotNormalized(f64),

    #[error("coherent amplitude undefined at gamma = 0 under the flat-window mode convention")]
    AmplitudeUndefined,

    #[error("phase-space grid too narrow: boundary mass {mass:e} exceeds {limit:e}")]
    GridTruncated { mass: f64, limit: f64 },

    #[error("reduced single-mode state is inconsistent with the photon truncation: min eigenvalue {0:e}")]
    TruncationInconsistent(f64),

    #[error("photon cap overflow: leaked mass {leaked:e} exceeds {limit:e}")]
    CapOverflow { leaked: f64, limit: f64 },

    #[error("bin index {index} out of range (bins: {bins})")]
    BinOutOfRange { index: usize, bins: usize },

    #[error("config file parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
