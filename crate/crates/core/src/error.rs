use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Constraint on the failure probabilities of a sequential chain that a
/// caller-supplied parameter set violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    /// q1 * q2 >= s^2, otherwise the failure element is not positive.
    FailurePositivity,
    /// Bob's product q1 * q2 must equal s^2 / t^2.
    BobOverlap,
    /// Charlie's product q1 * q2 must equal t^2.
    CharlieOverlap,
    /// The intermediate overlap t must lie in [s, 1].
    OverlapRange,
}

impl std::fmt::Display for Constraint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let text = match self {
            Constraint::FailurePositivity => "q1*q2 >= s^2",
            Constraint::BobOverlap => "q1B*q2B = s^2/t^2",
            Constraint::CharlieOverlap => "q1C*q2C = t^2",
            Constraint::OverlapRange => "s <= t <= 1",
        };
        f.write_str(text)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {0} is outside the supported range 1..=6")]
    UnsupportedDimension(usize),

    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("columns are not orthonormal (max Gram deviation {0:e})")]
    NotOrthonormal(f64),

    #[error("vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("overlap s = {0} is outside [0, 1]")]
    OverlapOutOfRange(f64),

    #[error("overlap s = {0} is degenerate; need 0 < s < 1")]
    DegenerateOverlap(f64),

    #[error("constraint {constraint} violated: {detail}")]
    ConstraintViolation { constraint: Constraint, detail: String },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("parameter mismatch: {0}")]
    ParameterMismatch(String),

    #[error("input index must be 1 or 2, got {0}")]
    InvalidInputIndex(usize),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
