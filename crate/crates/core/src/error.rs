use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("format error{}: {msg}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Format { line: Option<usize>, msg: String },

    #[error("duplicate token {0:?}")]
    DuplicateToken(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("degenerate vector: {0}")]
    DegenerateVector(String),

    #[error("empty candidate pool")]
    EmptyPool,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("empty document: {0}")]
    EmptyDocument(String),

    #[error("too short: {have} points, at least {need} required")]
    TooShort { have: usize, need: usize },

    #[error("degenerate trajectory: {0}")]
    DegenerateTrajectory(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("unknown token {0:?}")]
    UnknownToken(String),

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn format(line: Option<usize>, msg: impl Into<String>) -> Self {
        Error::Format {
            line,
            msg: msg.into(),
        }
    }
}
