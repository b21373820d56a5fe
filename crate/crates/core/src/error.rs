use thiserror::Error;

/// Errors raised by curve construction, operator algebra and verification.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size {0} is too small: need an even n >= 8")]
    GridTooSmall(usize),

    #[error("curve is not immersed: speed {speed:.3e} at index {index} is below threshold {threshold:.3e}")]
    NotImmersed {
        index: usize,
        speed: f64,
        threshold: f64,
    },

    #[error("grid mismatch: expected {expected} samples, found {found}")]
    GridMismatch { expected: usize, found: usize },

    #[error("not a diffeomorphism of the circle: {0}")]
    NotADiffeo(String),

    #[error("curve is not constant speed: relative speed deviation {deviation:.3e} exceeds {tolerance:.1e}")]
    NotConstantSpeed { deviation: f64, tolerance: f64 },

    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(String),

    #[error("coefficient field must be strictly positive: value {value:.3e} at index {index}")]
    NonPositiveCoefficient { index: usize, value: f64 },

    #[error("operator is not symmetric positive: relative asymmetry {asymmetry:.3e}, min Rayleigh quotient {min_rayleigh:.3e}")]
    NotSymmetricPositive { asymmetry: f64, min_rayleigh: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse(err.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Parse(err.to_string())
    }
}

pub(crate) fn check_grid(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::GridMismatch { expected, found })
    }
}
