use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("surface with genus {genus} and {boundary} boundary components has Euler characteristic {chi} >= 0")]
    NonHyperbolicSurface { genus: usize, boundary: usize, chi: i64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("minimal displacement {value:e} is within its certified error {error:e}")]
    UncertifiedMargin { value: f64, error: f64 },

    #[error("positivity verdict unknown at exponent p = {p}")]
    VerdictUnknown { p: i64 },

    #[error("element is not dominant: {0}")]
    NotDominant(String),

    #[error("no positive exponent found after scanning {scanned} candidates")]
    WindowExhausted { scanned: usize },

    #[error("frame is not Lagrangian (residual {residual:e})")]
    NotLagrangian { residual: f64 },

    #[error("Lagrangians are not transverse (margin {margin:e})")]
    NotTransverse { margin: f64 },

    #[error("Kashiwara form has an eigenvalue {eigenvalue:e} below the zero threshold")]
    NearDegenerate { eigenvalue: f64 },

    #[error("path refinement exceeded {max_steps} steps")]
    RefinementLimit { max_steps: usize },

    #[error("lifted relator is not central: winding {winding} is {distance:e} from an integer")]
    RelatorNotCentral { winding: f64, distance: f64 },

    #[error("windings disagree across basepoints (spread {spread:e})")]
    NumericalDrift { spread: f64 },

    #[error("bad hyperbolization: {0}")]
    BadHyperbolization(String),

    #[error("boundary generator {index} is not hyperbolic (|trace| = {trace})")]
    NonHyperbolicBoundary { index: usize, trace: f64 },

    #[error("representations do not share one presentation")]
    MixedPresentations,

    #[error("obstructions have the same sign (q1 = {q1:e}, q2 = {q2:e})")]
    SameSignObstructions { q1: f64, q2: f64 },

    #[error("relator residual {residual:e} exceeds tolerance {tolerance:e}")]
    RelatorViolation { residual: f64, tolerance: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Stable machine-readable code used in CLI reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonHyperbolicSurface { .. } => "non_hyperbolic_surface",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::UncertifiedMargin { .. } => "uncertified_margin",
            Error::VerdictUnknown { .. } => "verdict_unknown",
            Error::NotDominant(_) => "not_dominant",
            Error::WindowExhausted { .. } => "window_exhausted",
            Error::NotLagrangian { .. } => "not_lagrangian",
            Error::NotTransverse { .. } => "not_transverse",
            Error::NearDegenerate { .. } => "near_degenerate",
            Error::RefinementLimit { .. } => "refinement_limit",
            Error::RelatorNotCentral { .. } => "relator_not_central",
            Error::NumericalDrift { .. } => "numerical_drift",
            Error::BadHyperbolization(_) => "bad_hyperbolization",
            Error::NonHyperbolicBoundary { .. } => "non_hyperbolic_boundary",
            Error::MixedPresentations => "mixed_presentations",
            Error::SameSignObstructions { .. } => "same_sign_obstructions",
            Error::RelatorViolation { .. } => "relator_violation",
            Error::Parse(_) => "parse_error",
            Error::Schema(_) => "schema_error",
            Error::InvalidArgument(_) => "invalid_argument",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
