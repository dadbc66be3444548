use std::path::PathBuf;

use crate::month::YearMonth;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    // corpus
    #[error("malformed record at line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("corpus contains no valid records")]
    EmptyCorpus,
    #[error("invalid month key {0:?} (expected YYYY-MM)")]
    InvalidMonth(String),
    #[error("empty month range: {start} is after {end}")]
    EmptySpan { start: YearMonth, end: YearMonth },

    // lexicon
    #[error("lexicon word {0:?} is listed as both positive and negative")]
    LexiconOverlap(String),

    // lda
    #[error("slice has no tokens to model")]
    EmptySlice,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    // topic geometry
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("not a probability distribution: {0}")]
    NotADistribution(String),
    #[error("projection needs at least two topics, got {0}")]
    TooFewTopics(usize),

    // indicator
    #[error("month spans do not match")]
    SpanMismatch,
    #[error("window of {window} needs {needed} observations, series has {len}")]
    WindowTooLarge { window: usize, needed: usize, len: usize },
    #[error("need at least two observations per regime (recession: {recession}, expansion: {expansion})")]
    InsufficientRegimeData { recession: usize, expansion: usize },

    // factor panel
    #[error("invalid transform code {0}")]
    InvalidTcode(u8),
    #[error("log transform of non-positive value {value} at row {row}")]
    NonPositiveForLog { row: usize, value: f64 },
    #[error("column has no observed values")]
    AllMissing,
    #[error("panel has no balanced block of rows")]
    UnbalancedPanel,
    #[error("correlation matrix has {positive} positive eigenvalues, {requested} factors requested")]
    RankDeficient { positive: usize, requested: usize },
    #[error("malformed panel: {0}")]
    MalformedPanel(String),

    // probit
    #[error("input series share no months")]
    NoOverlap,
    #[error("no rows remain after lagging by {horizon} months")]
    EmptyAfterLag { horizon: usize },
    #[error("outcome contains a single class")]
    OneClassOnly,
    #[error("information matrix is not invertible (collinear columns?)")]
    Noninvertible,
    #[error("probit did not converge after {iterations} iterations (max |gradient| {gradient:e})")]
    NonConvergence { iterations: usize, gradient: f64 },
    #[error("design columns do not match the fitted model: {0}")]
    SchemaMismatch(String),
    #[error("restricted model is not nested in the full model: {0}")]
    NotNested(String),
    #[error("models were fitted on different samples")]
    SampleMismatch,
    #[error("{rows} rows cannot identify {columns} coefficients")]
    TooFewRows { rows: usize, columns: usize },

    // evaluation
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("training region too short to fit the model")]
    InsufficientTraining,
    #[error("block length {block} exceeds sample size {n}")]
    BlockTooLong { block: usize, n: usize },
    #[error("loss differential has zero variance (identical forecasts)")]
    ZeroLossDifferential,
    #[error("need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    // pipeline
    #[error("configuration error: {0}")]
    Config(String),
    #[error("missing artifact {path}: run `{stage}` first")]
    MissingArtifact { path: PathBuf, stage: &'static str },
    #[error("month {month}: {source}")]
    AtMonth {
        month: YearMonth,
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

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn at_month(self, month: YearMonth) -> Self {
        Error::AtMonth {
            month,
            source: Box::new(self),
        }
    }

    /// True for errors caused by bad configuration or missing inputs, as
    /// opposed to failures while computing.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::MissingArtifact { .. } | Error::InvalidConfig(_)
        ) || matches!(self, Error::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound)
    }
}
