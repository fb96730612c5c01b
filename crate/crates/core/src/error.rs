use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("nonstationary AR coefficient {0}: |alpha| must be < 1")]
    Nonstationary(f64),

    #[error("trajectory escaped at step {step}")]
    Escape { step: usize },

    #[error("step size underflow at t = {t} (h = {h})")]
    Stiffness { t: f64, h: f64 },

    #[error("length error: {0}")]
    Length(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("filter design error: {0}")]
    Design(String),

    #[error("normalization error: {0}")]
    Normalization(String),

    #[error("split error: {0}")]
    Split(String),

    #[error("non-finite value at step {step} ({what})")]
    Numeric { step: usize, what: &'static str },

    #[error("training diverged at epoch {epoch}")]
    Training { epoch: usize },

    #[error("surrogate generation failed for pair {pair}: {source}")]
    Surrogate { pair: usize, source: Box<Error> },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage { stage: &'static str, source: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short category name, used by the CLI for its error line and exit code.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Parameter(_) | Error::Nonstationary(_) | Error::Design(_) => "parameter",
            Error::Escape { .. } | Error::Stiffness { .. } | Error::Numeric { .. } => "numeric",
            Error::Training { .. } => "training",
            Error::Length(_) | Error::Split(_) | Error::Normalization(_) => "data",
            Error::Parse { .. } | Error::Json(_) => "parse",
            Error::Surrogate { source, .. } | Error::Stage { source, .. } => source.category(),
            Error::Usage(_) => "usage",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }

    pub fn stage(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |e| Error::Stage { stage, source: Box::new(e) }
    }
}
