use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("root finder did not converge on [{lo}, {hi}] (f(lo)={f_lo}, f(hi)={f_hi}) after {iterations} iterations")]
    RootNotConverged {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
        iterations: usize,
    },

    #[error("map is not symplectic: path-independence residual {residual:e} exceeds {tolerance:e}")]
    NotSymplectic { residual: f64, tolerance: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("trajectory left the safety box at t={t}")]
    EscapedSafetyBox { t: f64 },

    #[error("could not invert map at {point:?}: residual {residual:e}")]
    InversionFailed { point: Vec<f64>, residual: f64 },

    #[error("path is not horizontal: residual {residual:e} exceeds {tolerance:e}")]
    NotHorizontal { residual: f64, tolerance: f64 },

    #[error("grid does not cover the support box")]
    GridDoesNotCover,

    #[error("no feasible candidate: {0}")]
    Infeasible(String),

    #[error("config error at line {line}, column {column}: {message}")]
    Config {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{0}")]
    Validation(String),

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::RootNotConverged { .. }
                | Error::NotSymplectic { .. }
                | Error::NonFinite(_)
                | Error::EscapedSafetyBox { .. }
                | Error::InversionFailed { .. }
                | Error::NotHorizontal { .. }
                | Error::Infeasible(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
