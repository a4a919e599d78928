use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid coupling parameters {0:?}: entries must be nonnegative and sum to 1")]
    InvalidGamma([f64; 3]),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("matrix not symmetric: max |a_ij - a_ji| = {found:e} exceeds {tol:e}")]
    NotSymmetric { found: f64, tol: f64 },

    #[error("unstable filter: spectral radius of the resolvent argument is {radius}, must be < 1")]
    Unstable { radius: f64 },

    #[error("resolvent pole: denominator {denom:e} at eigenvalue pair ({lam_c}, {lam_g})")]
    Pole { denom: f64, lam_c: f64, lam_g: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: String, found: String },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numeric kind (instability, poles, divergence),
    /// as opposed to usage errors (bad arguments, malformed files).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NonFinite(_)
                | Error::NotSymmetric { .. }
                | Error::Unstable { .. }
                | Error::Pole { .. }
                | Error::Degenerate(_)
                | Error::Numeric(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
