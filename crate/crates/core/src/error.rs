use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be an integer N >= 2, got {0}")]
    InvalidDimension(u32),

    #[error("radius must be non-negative and finite, got {0}")]
    InvalidRadius(f64),

    #[error("vector of length {found} does not match dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{0}")]
    Domain(String),

    #[error("integrand is not finite at x = {location} (value {value})")]
    NonFiniteIntegrand { location: f64, value: f64 },

    #[error("invalid integration interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },

    #[error("integral did not converge: {0}")]
    Divergent(String),

    #[error("profile magnitude {found} exceeds the admissible cap {cap}")]
    ProfileTooLarge { found: f64, cap: f64 },

    #[error("profile must vanish at the unit sphere, but u(1) = {0}")]
    BoundaryNotZero(f64),

    #[error("invalid sampled profile: {0}")]
    InvalidSamples(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
