//! Configuration, experiment orchestration, trace persistence and plot
//! emission for the streaming optimal-transport solvers.

pub mod config;
pub mod experiment;
pub mod plot;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] stream_ot::Error),

    #[error("config file {path}: {source}")]
    ConfigIo {
        path: String,
        source: std::io::Error,
    },

    #[error("config file {path}: {source}")]
    ConfigParse {
        path: String,
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    OutputIo {
        path: String,
        source: std::io::Error,
    },

    #[error("invalid configuration: {0}")]
    Invalid(String),

    #[error("trace file {path}: {reason}")]
    BadTrace { path: String, reason: String },
}

pub type Result<T> = std::result::Result<T, CliError>;
