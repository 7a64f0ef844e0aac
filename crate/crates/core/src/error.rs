use thiserror::Error;

/// Errors raised by cone, map and spectral operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConeError {
    /// Malformed or out-of-contract input (bad kind, point outside the cone, bad parameter).
    #[error("input error: {0}")]
    Input(String),
    /// The operation is not available for this cone or map variant.
    #[error("capability error: {0}")]
    Capability(String),
    /// A numeric domain violation (e.g. square root of an indefinite matrix).
    #[error("domain error: {0}")]
    Domain(String),
    /// A cone or map could not be constructed from the given data.
    #[error("construction error: {0}")]
    Construction(String),
    /// Problem size exceeds a hard cap.
    #[error("size error: {0}")]
    Size(String),
}

pub type Result<T> = std::result::Result<T, ConeError>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(ConeError::Input(msg.into()))
}
