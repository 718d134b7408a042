use std::fmt;

use crate::ComplexPoint;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse failure class, used to map errors onto process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    InvalidInput,
    Numerical,
    Declined,
}

#[derive(Clone, Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {field}: {message}")]
    InvalidInput { field: String, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("root solver did not converge after {iterations} iterations (worst residual {residual:e})")]
    Solver { iterations: usize, residual: f64 },

    #[error("ill-conditioned input: {0}")]
    IllConditioned(String),

    #[error("continuation failed near w = {}: {message}", Pt(.location))]
    Continuation { message: String, location: ComplexPoint },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("synthesis failed: best residual {best_residual:e} exceeds tolerance")]
    Synthesis { best_residual: f64 },

    #[error("not a factorization: {0}")]
    NotAFactorization(String),

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("declined: {0}")]
    Declined(String),
}

impl Error {
    pub(crate) fn input(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidInput {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn continuation(message: impl Into<String>, location: ComplexPoint) -> Self {
        Error::Continuation {
            message: message.into(),
            location,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidInput { .. } | Error::Domain(_) | Error::Precondition(_) => ErrorKind::InvalidInput,
            Error::Declined(_) => ErrorKind::Declined,
            _ => ErrorKind::Numerical,
        }
    }
}

struct Pt<'a>(&'a ComplexPoint);

impl fmt::Display for Pt<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6e}{:+.6e}i", self.0.re, self.0.im)
    }
}
