use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("field length {got} does not match grid with {expected} cells")]
    LengthMismatch { expected: usize, got: usize },

    #[error("initial data violates positivity: {0}")]
    Positivity(String),

    #[error("positivity violation at t={t}: u[{cell}]={value:e}")]
    PositivityViolation { t: f64, cell: usize, value: f64 },

    #[error("tridiagonal solve broke down at row {row}")]
    SolveFailure { row: usize },

    #[error("step failed after {halvings} halvings at t={t} (epsilon={epsilon}): {source}")]
    RetriesExhausted {
        t: f64,
        epsilon: f64,
        halvings: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("non-finite functional `{name}` at t={t}")]
    NonFiniteFunctional { name: &'static str, t: f64 },

    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("malformed snapshot {path}: {msg}")]
    Snapshot { path: String, msg: String },

    #[error("sweep member epsilon={epsilon} failed: {source}")]
    Sweep {
        epsilon: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
