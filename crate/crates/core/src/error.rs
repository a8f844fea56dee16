use thiserror::Error;

/// Errors surfaced by the sampler library and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("divergence: {0}")]
    Divergence(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate series: {0}")]
    DegenerateSeries(String),
    #[error("misaligned gradient grids: {0}")]
    Alignment(String),
    #[error("tuning failed: {0}")]
    TuningFailure(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("config parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Process exit code for the CLI, one per error category.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parse(_) => 2,
            Error::Divergence(_) | Error::TuningFailure(_) => 3,
            Error::Domain(_) | Error::DegenerateSeries(_) | Error::Alignment(_) => 4,
            Error::Io(_) | Error::Csv(_) => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
