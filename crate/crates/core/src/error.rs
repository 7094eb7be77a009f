use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A pointwise formula was evaluated outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Initial data cannot generate a global generalized solution.
    #[error(
        "inadmissible initial data: v - tau = {left_value} at sample {left_index} (s = {left_s}) \
         is not below v + tau = {right_value} at sample {right_index} (s = {right_s})"
    )]
    Inadmissible {
        left_index: usize,
        left_s: f64,
        left_value: f64,
        right_index: usize,
        right_s: f64,
        right_value: f64,
    },

    #[error("characteristic slope out of range: {0}")]
    SlopeOutOfRange(String),

    #[error("CFL violation: dt = {dt} exceeds the bound {bound}")]
    Cfl { dt: f64, bound: f64 },

    #[error("degenerate state: {0}")]
    Degenerate(String),

    #[error("unknown set identifier `{0}`")]
    UnknownSet(String),

    #[error("membership verdicts disagree: {0}")]
    InconsistentVerdict(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
