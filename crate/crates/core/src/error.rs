use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid rational {0:?}")]
    Rational(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("invalid sheaf")]
    InvalidSheaf(#[from] crate::sheaf::SheafViolations),

    #[error("invalid scene")]
    InvalidScene(#[from] crate::geometry::SceneViolation),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn mismatch(context: &'static str, expected: usize, found: usize) -> Self {
        Error::DimensionMismatch {
            context,
            expected,
            found,
        }
    }
}
