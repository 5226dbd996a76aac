use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("group validation failed: {0}")]
    GroupValidation(String),

    #[error("representation rejected: {0}")]
    BadRepresentation(String),

    #[error("{what} needs size {needed}, above the cap {cap}")]
    CapExceeded { what: String, needed: u128, cap: u128 },

    #[error("phase snap failed at {tuple:?}: distance {distance:.3e} exceeds {tol:.1e}")]
    PhaseSnap { tuple: Vec<usize>, distance: f64, tol: f64 },

    #[error("cohomology inconsistency: {0}")]
    CohomologyInconsistency(String),

    #[error("degenerate tensor: {0}")]
    DegenerateTensor(String),

    #[error("primitivity criteria disagree: spectral={spectral}, span={span}")]
    NumericalAmbiguity { spectral: bool, span: bool },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invariance criteria disagree: spectral={spectral}, marginal={marginal}")]
    InvarianceAmbiguity { spectral: bool, marginal: bool },

    #[error("intertwiner extraction failed: {0}")]
    ExtractionFailure(String),

    #[error("not a projective representation: {0}")]
    NotProjective(String),

    #[error("state is not reflection symmetric (peripheral modulus {0:.3e})")]
    NotReflectionSymmetric(f64),

    #[error("gap violation at s={s}: observed {observed:.6e} < declared {declared:.6e}")]
    GapViolation { s: f64, observed: f64, declared: f64 },

    #[error("model inconsistency: {0}")]
    ModelInconsistency(String),

    #[error("configuration does not cover site ({0}, {1})")]
    MissingSite(i64, i64),

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

impl Error {
    /// Stable module-qualified code for machine-readable reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "core.invalid_argument",
            Error::GroupValidation(_) => "groups.validation",
            Error::BadRepresentation(_) => "groups.representation",
            Error::CapExceeded { .. } => "core.cap_exceeded",
            Error::PhaseSnap { .. } => "cohomology.phase_snap",
            Error::CohomologyInconsistency(_) => "cohomology.inconsistency",
            Error::DegenerateTensor(_) => "mps.degenerate_tensor",
            Error::NumericalAmbiguity { .. } => "mps.numerical_ambiguity",
            Error::Precondition(_) => "core.precondition",
            Error::InvarianceAmbiguity { .. } => "spt_indices.invariance_ambiguity",
            Error::ExtractionFailure(_) => "spt_indices.extraction_failure",
            Error::NotProjective(_) => "spt_indices.not_projective",
            Error::NotReflectionSymmetric(_) => "spt_indices.not_reflection_symmetric",
            Error::GapViolation { .. } => "spectral_flow.gap_violation",
            Error::ModelInconsistency(_) => "dw2d.model_inconsistency",
            Error::MissingSite(..) => "dw2d.missing_site",
            Error::Linalg(_) => "core.linalg",
            Error::Parse(_) => "core.parse",
        }
    }
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
