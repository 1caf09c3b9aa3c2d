//! Error types shared by all modules.

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the simulation, estimation and experiment layers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An input failed validation.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: String,
    },

    /// The autoregressive polynomial has a root inside or on the unit circle.
    #[error("AR polynomial is not causal (companion spectral radius {spectral_radius})")]
    NonCausal { spectral_radius: f64 },

    /// A sample cannot support the requested estimate.
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    /// The root finder stopped without locating a root. Carries the last
    /// bracket and residual so failures can be diagnosed from logs.
    #[error(
        "solver did not converge after {iterations} evaluations: \
         theta={theta:.6e}, |target|={residual:.3e}, bracket=[{bracket_lo:.6e}, {bracket_hi:.6e}]"
    )]
    ConvergenceFailure {
        iterations: usize,
        theta: f64,
        residual: f64,
        bracket_lo: f64,
        bracket_hi: f64,
    },

    /// An experiment configuration is inconsistent.
    #[error("invalid experiment config: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
