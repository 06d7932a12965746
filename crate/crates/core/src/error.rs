use thiserror::Error;

/// Failures raised anywhere in the analysis pipeline.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("structure constants are not antisymmetric (max defect {0:e})")]
    NotAntisymmetric(f64),
    #[error("Jacobi identity fails (max residual {0:e})")]
    NotJacobi(f64),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("metric is degenerate or not symmetric: {0}")]
    DegenerateMetric(String),
    #[error("plane is degenerate for the metric (gram {0:e})")]
    DegeneratePlane(f64),
    #[error("endomorphism is not skew-symmetric for the metric (defect {0:e})")]
    NotSkew(f64),
    #[error("endomorphism is zero")]
    ZeroMatrix,
    #[error("normal form reduction failed (residual {residual:e}, best form {best_form})")]
    ReductionFailed { residual: f64, best_form: String },
    #[error("table and curvature disagree: {0}")]
    InconsistentCurvature(String),
    #[error("alpha = {0} is not an admissible plane-wave parameter")]
    InvalidAlpha(f64),
    #[error("tolerance {0:e} outside the supported range [1e-12, 1e-6]")]
    ToleranceUnachievable(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("atlas mismatch in rows: {0:?}")]
    AtlasMismatch(Vec<String>),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::NotAntisymmetric(_) | Error::DegenerateMetric(_) => 2,
            Error::NotJacobi(_) => 3,
            Error::DegenerateInput(_) | Error::DegeneratePlane(_) => 4,
            Error::ReductionFailed { .. }
            | Error::InconsistentCurvature(_)
            | Error::NotSkew(_)
            | Error::ZeroMatrix
            | Error::InvalidAlpha(_) => 5,
            Error::AtlasMismatch(_) => 6,
            Error::ToleranceUnachievable(_) => 7,
        }
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotAntisymmetric(_) => "NotAntisymmetric",
            Error::NotJacobi(_) => "NotJacobi",
            Error::DegenerateInput(_) => "DegenerateInput",
            Error::DegenerateMetric(_) => "DegenerateMetric",
            Error::DegeneratePlane(_) => "DegeneratePlane",
            Error::NotSkew(_) => "NotSkew",
            Error::ZeroMatrix => "ZeroMatrix",
            Error::ReductionFailed { .. } => "ReductionFailed",
            Error::InconsistentCurvature(_) => "InconsistentCurvature",
            Error::InvalidAlpha(_) => "InvalidAlpha",
            Error::ToleranceUnachievable(_) => "ToleranceUnachievable",
            Error::InvalidInput(_) => "InvalidInput",
            Error::AtlasMismatch(_) => "AtlasMismatch",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
