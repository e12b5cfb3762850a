use thiserror::Error;

/// Errors raised by the certification library.
///
/// Each variant corresponds to one failure class that callers (notably the
/// CLI) map onto machine-readable error kinds.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertError {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("separation undefined: {0}")]
    UndefinedSeparation(String),

    #[error("resolution too coarse: {0}")]
    ResolutionTooCoarse(String),

    #[error("invalid node set: {0}")]
    InvalidNodes(String),

    #[error("tolerance not met: achieved {achieved:e}, required {required:e}")]
    ToleranceNotMet { achieved: f64, required: f64 },

    #[error("window too small: {0}")]
    WindowTooSmall(String),

    #[error("no kernel: {0}")]
    NoKernel(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("unsupported body: {0}")]
    UnsupportedBody(String),

    #[error("pipeline failed at {step}: {detail}")]
    PipelineFailed { step: String, detail: String },

    #[error("window required: {0}")]
    WindowRequired(String),

    #[error("out of theorem range: {0}")]
    OutOfTheoremRange(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("step failed at level {level}: worst |det| = {worst_det:e}, worst eig_min = {worst_eig:e}")]
    StepFailed {
        level: usize,
        worst_det: f64,
        worst_eig: f64,
    },
}

impl CertError {
    /// Stable snake-case identifier used in machine-readable error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            CertError::InvalidSpec(_) => "invalid_spec",
            CertError::DimensionMismatch { .. } => "dimension_mismatch",
            CertError::Unsupported(_) => "unsupported",
            CertError::InvalidLattice(_) => "invalid_lattice",
            CertError::UndefinedSeparation(_) => "undefined_separation",
            CertError::ResolutionTooCoarse(_) => "resolution_too_coarse",
            CertError::InvalidNodes(_) => "invalid_nodes",
            CertError::ToleranceNotMet { .. } => "tolerance_not_met",
            CertError::WindowTooSmall(_) => "window_too_small",
            CertError::NoKernel(_) => "no_kernel",
            CertError::NotApplicable(_) => "not_applicable",
            CertError::UnsupportedBody(_) => "unsupported_body",
            CertError::PipelineFailed { .. } => "pipeline_failed",
            CertError::WindowRequired(_) => "window_required",
            CertError::OutOfTheoremRange(_) => "out_of_theorem_range",
            CertError::Precondition(_) => "precondition",
            CertError::StepFailed { .. } => "step_failed",
        }
    }
}

pub type Result<T> = std::result::Result<T, CertError>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(CertError::DimensionMismatch { expected, got });
    }
    Ok(())
}
