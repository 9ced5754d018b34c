use thiserror::Error;

/// Errors raised by the dependence measures, their null distributions and
/// the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Constant series, singular covariance or a zero-variance residual.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("lag {lag} out of range for series of length {len}")]
    LagOutOfRange { lag: i64, len: usize },

    /// The regression design is numerically rank deficient.
    #[error("ill-conditioned regression design (reciprocal condition estimate {rcond:.3e})")]
    IllConditioned { rcond: f64 },

    /// One or more chain terms have no effective degrees of freedom left.
    #[error("insufficient effective samples for terms {terms:?} (effective dof {dof:?})")]
    InsufficientEffectiveSamples { terms: Vec<String>, dof: Vec<f64> },

    #[error("model fit failed: {0}")]
    FitFailed(String),

    #[error("argument outside the function domain: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("ingestion error: {0}")]
    Ingestion(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Short, stable label used when bookkeeping dropped experiment trials.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::Degenerate(_) => "degenerate",
            Error::LagOutOfRange { .. } => "lag_out_of_range",
            Error::IllConditioned { .. } => "ill_conditioned",
            Error::InsufficientEffectiveSamples { .. } => "insufficient_effective_samples",
            Error::FitFailed(_) => "fit_failed",
            Error::Domain(_) => "domain",
            Error::Config(_) => "config",
            Error::Ingestion(_) => "ingestion",
            Error::Io(_) => "io",
        }
    }
}
