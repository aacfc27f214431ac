use thiserror::Error;

/// Errors raised while designing, verifying or simulating a line code.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("zero vector has no {0}")]
    ZeroVector(&'static str),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("design infeasible: {0}")]
    DesignInfeasible(String),

    #[error("group relation violated: {0}")]
    RelationViolation(String),

    #[error("group has {found} distinct elements, expected {expected}")]
    DegenerateGroup { expected: usize, found: usize },

    #[error("codebook rows collide: initial vector lies on a mirror")]
    DegenerateCodebook,

    #[error("codebook is not an orthotope: {0}")]
    NotOrthotope(String),

    #[error("alpha profiles disagree: {0}")]
    ProfileMismatch(String),

    #[error("no scale admits a balanced integer rounding")]
    NoBalancedRounding,

    #[error("document mismatch: {0}")]
    DocumentMismatch(String),

    #[error("malformed document: {0}")]
    MalformedDocument(String),
}

impl Error {
    /// Infeasible or degenerate designs are user-facing outcomes; everything
    /// else is a broken invariant.
    pub fn is_design_failure(&self) -> bool {
        matches!(
            self,
            Error::DesignInfeasible(_)
                | Error::DegenerateCodebook
                | Error::InvalidInput(_)
                | Error::ZeroVector(_)
                | Error::DocumentMismatch(_)
                | Error::MalformedDocument(_)
        )
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::SingularMatrix => "SingularMatrix",
            Error::ZeroVector(_) => "ZeroVector",
            Error::InvalidInput(_) => "InvalidInput",
            Error::DesignInfeasible(_) => "DesignInfeasible",
            Error::RelationViolation(_) => "RelationViolation",
            Error::DegenerateGroup { .. } => "DegenerateGroup",
            Error::DegenerateCodebook => "DegenerateCodebook",
            Error::NotOrthotope(_) => "NotOrthotope",
            Error::ProfileMismatch(_) => "ProfileMismatch",
            Error::NoBalancedRounding => "NoBalancedRounding",
            Error::DocumentMismatch(_) => "DocumentMismatch",
            Error::MalformedDocument(_) => "MalformedDocument",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
