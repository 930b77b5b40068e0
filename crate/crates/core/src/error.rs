use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A parameter outside the domain where the distribution is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The likelihood equation has no root inside the search bracket.
    #[error("no root of the likelihood equation in [{low}, {high}] (mean log {log_mean})")]
    NoRoot { low: f64, high: f64, log_mean: f64 },

    #[error("replicate {index} of repetition {repetition} failed twice: {source}")]
    Replicate {
        repetition: u32,
        index: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("table cell gamma={gamma}, n={n} failed: {source}")]
    Cell {
        gamma: f64,
        n: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("table format: {0}")]
    Format(String),

    #[error("no tabulated cutoffs for {0}; run a bespoke simulation instead")]
    NoTableMatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
