use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("not found: {0}")]
    NotFound(String),

    #[error("eigensolver did not converge (residual {residual:e})")]
    Numerical { residual: f64 },

    #[error("provider `{provider}` failed: {message}")]
    Provider {
        provider: String,
        message: String,
        retryable: bool,
    },

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("build stage `{stage}` failed: {cause}")]
    Stage { stage: &'static str, cause: Box<CoreError> },
}

impl CoreError {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        CoreError::Input(msg.into())
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        CoreError::Stage {
            stage,
            cause: Box::new(self),
        }
    }
}

impl From<serde_json::Error> for CoreError {
    fn from(err: serde_json::Error) -> Self {
        CoreError::Parse {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CoreError>;
