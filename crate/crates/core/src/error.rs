use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvansError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("profile did not reach endpoint tolerance {tol:e} within |L| <= {cap} (error {achieved:e})")]
    ProfileNonConvergence { tol: f64, cap: f64, achieved: f64 },

    #[error("spectral split failed at lambda = {lambda}: min |Re alpha| = {gap:e}")]
    SplitFailure { lambda: Complex64, gap: f64 },

    #[error("Kato step too large: projection change {change:.3} between {from} and {to}")]
    StepTooLarge {
        from: Complex64,
        to: Complex64,
        change: f64,
    },

    #[error("integration failed at x = {x}: {reason}")]
    IntegrationFailure { x: f64, reason: String },

    #[error("orthonormality lost: {corrections} re-orthonormalizations")]
    OrthonormalityLoss { corrections: usize },

    #[error("evaluator vanished on the contour at lambda = {lambda}")]
    ZeroOnContour { lambda: Complex64 },

    #[error("argument refinement exhausted after {insertions} insertions (max step {max_step:.3})")]
    RefinementExhausted { insertions: usize, max_step: f64 },

    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for EvansError {
    fn from(e: std::io::Error) -> Self {
        EvansError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for EvansError {
    fn from(e: serde_json::Error) -> Self {
        EvansError::Io(e.to_string())
    }
}

impl EvansError {
    /// Short machine-readable tag, used in sweep records.
    pub fn kind(&self) -> &'static str {
        match self {
            EvansError::Domain(_) => "domain",
            EvansError::ProfileNonConvergence { .. } => "profile_nonconvergence",
            EvansError::SplitFailure { .. } => "split_failure",
            EvansError::StepTooLarge { .. } => "step_too_large",
            EvansError::IntegrationFailure { .. } => "integration_failure",
            EvansError::OrthonormalityLoss { .. } => "orthonormality_loss",
            EvansError::ZeroOnContour { .. } => "zero_on_contour",
            EvansError::RefinementExhausted { .. } => "refinement_exhausted",
            EvansError::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, EvansError>;
