use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("missing column `{column}` in {source_name}")]
    MissingColumn { column: String, source_name: String },

    #[error("no parseable rows in {0}")]
    NoRows(String),

    #[error("duplicate timestamp {date} in {source_name}")]
    DuplicateTimestamp { date: String, source_name: String },

    #[error("unparseable date `{0}`")]
    BadDate(String),

    #[error("fetch failed for {url}: HTTP status {status}")]
    FetchFailed { url: String, status: u16 },

    #[error("network failure for {url}: {message}")]
    Network { url: String, message: String },

    #[error("payload from {0} is not CSV")]
    NotCsv(String),

    #[error("empty date intersection across series")]
    EmptyIntersection,

    #[error("log transform requested on non-positive column `{0}`")]
    NonPositiveLog(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("zero variance in {0}")]
    ZeroVariance(String),

    #[error("series too short: need {needed}, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("optimizer did not converge: {0}")]
    NonConvergence(String),

    #[error("singular correlation matrix")]
    SingularCorrelation,

    #[error("matrix not positive definite at t = {0}")]
    NotPositiveDefinite(usize),

    #[error("non-finite value in recursion at t = {0}")]
    NonFinite(usize),

    #[error("config error: {0}")]
    Config(String),

    #[error("stage `{stage}` failed{}: {source}", series.as_ref().map(|s| format!(" for series `{s}`")).unwrap_or_default())]
    Stage {
        stage: String,
        series: Option<String>,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn stage(stage: &str, series: Option<&str>, source: Error) -> Self {
        Error::Stage {
            stage: stage.to_string(),
            series: series.map(str::to_string),
            source: Box::new(source),
        }
    }

    /// Process exit code: 1 input/config, 2 numerical, 3 network.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Stage { source, .. } => source.exit_code(),
            Error::Network { .. } | Error::FetchFailed { .. } => 3,
            Error::ZeroVariance(_)
            | Error::TooShort { .. }
            | Error::InvalidParams(_)
            | Error::NonConvergence(_)
            | Error::SingularCorrelation
            | Error::NotPositiveDefinite(_)
            | Error::NonFinite(_) => 2,
            _ => 1,
        }
    }

    /// True for failures worth retrying (transport errors, not parse errors).
    pub fn is_retriable(&self) -> bool {
        matches!(self, Error::Network { .. })
    }
}
