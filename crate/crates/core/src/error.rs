use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain of a model function.
    #[error("domain error: {0}")]
    Domain(String),

    /// The power-coefficient auxiliary term has a vanishing denominator.
    #[error("power coefficient singular at lambda = {lambda}, beta = {beta}")]
    Singularity { lambda: f64, beta: f64 },

    /// Invalid configuration. `key` names the offending field.
    #[error("config error at `{key}`: {reason}")]
    Config { key: String, reason: String },

    /// Malformed wind data. `row` is 1-based and counts the header line.
    #[error("wind ingestion error at row {row}: {reason}")]
    Ingest { row: u64, reason: String },

    #[error("integration blew up at step {step} (t = {t})")]
    Integration { step: u64, t: f64 },

    /// A runtime monitor aborted the run.
    #[error("monitor `{monitor}` aborted the run at t = {t}: {reason}")]
    Monitor {
        monitor: &'static str,
        t: f64,
        reason: String,
    },

    #[error("comparison error: {0}")]
    Comparison(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
