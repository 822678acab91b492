use std::path::PathBuf;

use crate::gateway::BudgetReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Process exit code for validation and configuration failures.
pub const EXIT_VALIDATION: i32 = 2;
/// Process exit code for model backend failures (transport, replay miss, unusable responses).
pub const EXIT_BACKEND: i32 = 3;
/// Process exit code when the hallucination guard fires.
pub const EXIT_HALLUCINATION: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: row {row}: {message}")]
    MalformedRow {
        path: String,
        row: usize,
        message: String,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error(
        "request rejected by budget preflight: {} prompt tokens + {} reserved > {} context limit",
        .0.prompt_tokens, .0.reserved_response_tokens, .0.context_limit
    )]
    BudgetExceeded(BudgetReport),

    #[error("replay miss: no recorded response for fingerprint {fingerprint} (sample {sample})")]
    ReplayMiss { fingerprint: String, sample: u32 },

    #[error("backend error after {attempts} attempt(s): {message}")]
    Backend {
        status: Option<u16>,
        attempts: u32,
        message: String,
    },

    #[error("response_truncated: the backend stopped at its length limit")]
    ResponseTruncated,

    #[error("malformed_response: {reason}")]
    MalformedResponse { reason: String, raw: String },

    #[error("overfull_response: {count} themes returned, at most {cap} allowed")]
    OverfullResponse { count: usize, cap: usize, raw: String },

    #[error("hallucination: {context} referenced indices outside the input set: {indices:?}")]
    Hallucination {
        context: String,
        indices: Vec<String>,
    },

    #[error("{failed} of {total} chunks failed, above the {cap:.0}% failure cap", cap = .cap * 100.0)]
    TooManyFailures { failed: usize, total: usize, cap: f64 },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn malformed(reason: impl Into<String>, raw: impl Into<String>) -> Self {
        Error::MalformedResponse {
            reason: reason.into(),
            raw: raw.into(),
        }
    }

    /// Exit status a command-line driver should report for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Hallucination { .. } => EXIT_HALLUCINATION,
            Error::ReplayMiss { .. }
            | Error::Backend { .. }
            | Error::ResponseTruncated
            | Error::MalformedResponse { .. }
            | Error::OverfullResponse { .. }
            | Error::TooManyFailures { .. } => EXIT_BACKEND,
            Error::Config(_)
            | Error::InvalidInput(_)
            | Error::Io { .. }
            | Error::MalformedRow { .. }
            | Error::Json(_)
            | Error::BudgetExceeded(_) => EXIT_VALIDATION,
        }
    }
}
