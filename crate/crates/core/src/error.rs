use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("step size underflow at t = {t}: required step {h:e} is below the minimum")]
    StepUnderflow { t: f64, h: f64 },

    #[error("non-finite state encountered at t = {t}")]
    NonFinite { t: f64 },

    #[error("{0} is not supported for this model")]
    Unsupported(&'static str),

    #[error("no subharmonic: |C| = {c} is not below the threshold constant {c0}")]
    NoSubharmonic { c: f64, c0: f64 },

    #[error("resonance {p}:{q} is not tabulated")]
    NotTabulated { p: i64, q: u32 },

    #[error("periodic orbit {p}:{q} not found: {reason}")]
    NotFound { p: i64, q: u32, reason: String },

    #[error("invalid bracket [{lo}, {hi}]: {reason}")]
    InvalidBracket { lo: f64, hi: f64, reason: String },

    #[error("checkpoint {path}: {reason}")]
    Checkpoint { path: PathBuf, reason: String },

    #[error("checkpoint fingerprint mismatch: file has {found}, run expects {expected}")]
    FingerprintMismatch { expected: String, found: String },

    #[error("runs are not comparable: {0}")]
    Mismatch(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
