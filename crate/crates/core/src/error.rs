use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    /// Drift matrix has an eigenvalue with nonnegative real part.
    #[error("no steady state: drift matrix is unstable (max Re eig = {max_re:.3e})")]
    NoSteadyState { max_re: f64 },

    /// Parametric coupling at or above its oscillation threshold.
    #[error("stability: parametric cooperativity {cooperativity:.4} is not below threshold 1")]
    AboveThreshold { cooperativity: f64 },

    #[error("data inconsistency: {0}")]
    DataInconsistency(String),

    #[error("undefined local oscillator: Stokes Sz is zero")]
    UndefinedLocalOscillator,

    #[error("sideband order {order} exceeds truncation n_max = {n_max}")]
    Truncation { order: i32, n_max: u32 },

    #[error("fit failure: {0}")]
    FitFailure(String),

    #[error("validation error at `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },

    /// Wraps an inner error with the module that raised it.
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::NumericFailure(msg.into())
    }

    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            message: err.to_string(),
        }
    }

    pub fn context(self, ctx: impl Into<String>) -> Self {
        Error::Context {
            context: ctx.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error, with all context layers removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }

    /// Process exit code for the CLI: 2 validation, 3 numeric, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self.root() {
            Error::Io { .. } => 4,
            Error::NumericFailure(_) | Error::NoSteadyState { .. } | Error::FitFailure(_) => 3,
            _ => 2,
        }
    }
}

/// Attach module-qualified context to an error result.
pub(crate) trait ResultExt<T> {
    fn ctx(self, ctx: &str) -> Result<T>;
}

impl<T> ResultExt<T> for Result<T> {
    fn ctx(self, ctx: &str) -> Result<T> {
        self.map_err(|e| e.context(ctx))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_root_cause() {
        let e = Error::numeric("singular").context("channel_dynamics");
        assert_eq!(e.exit_code(), 3);
        assert_eq!(Error::validation("model.g1_hz", "negative").exit_code(), 2);
        assert_eq!(Error::io("x.json", "missing").context("run").exit_code(), 4);
        assert_eq!(Error::AboveThreshold { cooperativity: 1.2 }.exit_code(), 2);
    }
}
