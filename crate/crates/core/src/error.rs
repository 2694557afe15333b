use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the learning primitives and the experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cell ({row}, {col}) is outside the {rows}x{cols} grid")]
    InvalidCell {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("state index {index} is out of range for {count} states")]
    InvalidState { index: usize, count: usize },
    #[error("invalid world: {0}")]
    InvalidWorld(String),
    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("probabilities sum to {0}, expected 1")]
    NotNormalized(f64),
    #[error("negative weight {0}")]
    NegativeWeight(f64),
    #[error("state ({row}, {col}) is terminal")]
    TerminalState { row: usize, col: usize },
    #[error("invalid configuration: {}", .0.join("; "))]
    Config(Vec<String>),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the filesystem rather than of the inputs.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_unit_interval(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            range: "[0, 1]",
        })
    }
}
