use thiserror::Error;

/// Errors raised by the simulation pipeline.
///
/// Scalar payloads are stored as `f64` so the error type stays independent of
/// the working precision.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite value: {0}")]
    Numeric(String),

    #[error("beta vanishes or changes sign in [{t_lo}, {t_hi}]")]
    Singularity { t_lo: f64, t_hi: f64 },

    #[error("step size underflow at t = {t} (h = {h:e}); system too stiff for the requested tolerance")]
    Stiffness { t: f64, h: f64 },

    #[error("hamiltonian is not hermitian: |d - c/2| = {defect:e}")]
    NonHermitian { defect: f64 },

    #[error("truncation too small: edge weight {defect:e} exceeds limit {limit:e}; try M = {suggested}")]
    TruncationTooSmall {
        defect: f64,
        limit: f64,
        suggested: usize,
    },

    #[error("coefficient table: {0}")]
    Table(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Table(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn to_f64<T: num_traits::ToPrimitive>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
