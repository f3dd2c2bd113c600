use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("invalid scheme: {0}")]
    InvalidScheme(String),

    #[error("signal {signal} has zero marginal probability")]
    ZeroMarginal { signal: usize },

    #[error("signal {signal} has no observations")]
    ZeroColumn { signal: usize },

    #[error("signal {signal} column is degenerate (mass below 1e-12)")]
    DegenerateColumn { signal: usize },

    #[error("sender utilities leave [0, 1]")]
    RangeViolation,

    #[error("parameter outside its domain: {0}")]
    DomainViolation(String),

    #[error("exact enumeration needs {terms} terms, above the cap of {cap}")]
    TooLarge { terms: u128, cap: u128 },

    #[error("graph is disconnected")]
    DisconnectedGraph,

    #[error("optimization problem is infeasible: {0}")]
    Infeasible(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("signal support metric requires positive value")]
    ZeroValue,

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
