use thiserror::Error;

pub type Result<T, E = HarnackError> = std::result::Result<T, E>;

/// Every failure the toolkit can report. Each variant maps to a stable,
/// machine-readable code (see [`HarnackError::code`]).
#[derive(Debug, Error)]
pub enum HarnackError {
    #[error("matrix is not Hermitian: skew {skew:.3e} exceeds tolerance {tol:.3e}")]
    NonHermitianInput { skew: f64, tol: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("malformed matrix data: {0}")]
    DimensionError(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("matrix dimension {dim} exceeds the supported maximum {max}")]
    Capacity { dim: usize, max: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("resolvent (I - conj(z) T)^-1 is numerically singular at z = {re:+.6}{im:+.6}i")]
    SingularResolvent { re: f64, im: f64 },

    #[error("rho = {0} is not supported (rho >= 1 required)")]
    UnsupportedRho(f64),

    #[error(
        "unimodular eigenvalue {re:+.6}{im:+.6}i is defective \
         (algebraic multiplicity {algebraic}, geometric multiplicity {geometric})"
    )]
    DefectiveUnimodularEigenvalue {
        re: f64,
        im: f64,
        algebraic: usize,
        geometric: usize,
    },

    #[error("unimodular eigenspaces do not reduce the operator (residual {residual:.3e}, tolerance {tol:.3e})")]
    NotReducing { residual: f64, tol: f64 },

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("{operand} is not a rho-contraction for rho = {rho}: {reason}")]
    ClassViolation {
        operand: String,
        rho: f64,
        reason: String,
    },

    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("polynomial is identically zero")]
    ZeroPolynomial,

    #[error("bad shape: {0}")]
    BadShape(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl HarnackError {
    pub fn code(&self) -> &'static str {
        match self {
            HarnackError::NonHermitianInput { .. } => "NonHermitianInput",
            HarnackError::DimensionMismatch { .. } => "DimensionMismatch",
            HarnackError::DimensionError(_) => "DimensionError",
            HarnackError::Parse { .. } => "ParseError",
            HarnackError::Capacity { .. } => "CapacityError",
            HarnackError::NonFinite => "NonFinite",
            HarnackError::SingularResolvent { .. } => "SingularResolvent",
            HarnackError::UnsupportedRho(_) => "UnsupportedRho",
            HarnackError::DefectiveUnimodularEigenvalue { .. } => "DefectiveUnimodularEigenvalue",
            HarnackError::NotReducing { .. } => "NotReducing",
            HarnackError::PreconditionFailed(_) => "PreconditionFailed",
            HarnackError::ClassViolation { .. } => "ClassViolation",
            HarnackError::NotUnitary { .. } => "NotUnitary",
            HarnackError::ZeroPolynomial => "ZeroPolynomial",
            HarnackError::BadShape(_) => "BadShape",
            HarnackError::InvalidConfig(_) => "InvalidConfig",
            HarnackError::Io(_) => "IoError",
        }
    }
}

pub(crate) fn check_rho(rho: f64) -> Result<()> {
    if !(rho.is_finite() && rho >= 1.0) {
        return Err(HarnackError::UnsupportedRho(rho));
    }
    Ok(())
}
