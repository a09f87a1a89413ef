use std::io;

use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("field is bound to a different grid")]
    GridMismatch,
    #[error("non-finite value encountered{}", .0.as_deref().map(|c| format!(" in {c}")).unwrap_or_default())]
    NonFinite(Option<String>),
    #[error("operation undefined for the zero field")]
    ZeroField,
    #[error("unsupported dimension: {0}")]
    Dimension(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("invalid bracket: {0}")]
    Bracket(String),
    #[error("classification inversion at rho = {rho}: {detail}")]
    Inversion { rho: f64, detail: String },
    #[error("no negativity witness found: {0}")]
    NoWitness(String),
    #[error("integration aborted at t = {t_last_good}: non-finite state")]
    Integration { t_last_good: f64 },
    #[error("malformed field file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
