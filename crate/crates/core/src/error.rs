use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside the domain of a numeric function.
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    /// Inadmissible model or ensemble parameter.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// An integral or iteration failed to reach its tolerance.
    #[error("nonconvergence in {what}: {detail}")]
    NonConvergence { what: &'static str, detail: String },

    /// Malformed input data (matrices, literals, curves on different grids).
    #[error("invalid input: {0}")]
    Input(String),

    /// Problem size outside supported limits.
    #[error("size error: {0}")]
    Size(String),
}

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            func,
            detail: detail.into(),
        }
    }

    pub(crate) fn nonconvergence(what: &'static str, detail: impl Into<String>) -> Self {
        Error::NonConvergence {
            what,
            detail: detail.into(),
        }
    }

    /// True for errors caused by numerical nonconvergence rather than bad input.
    pub fn is_nonconvergence(&self) -> bool {
        matches!(self, Error::NonConvergence { .. })
    }
}
