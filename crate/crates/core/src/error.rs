use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("kernel with epsilon = 0 has no pointwise values; branch on the sharp case")]
    SharpKernel,
    #[error("non-finite state at t = {time}")]
    NonFinite { time: f64 },
    #[error("fundamental matrix is singular at t = {time} (det = {det:e})")]
    SingularFundamental { time: f64, det: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no secondary crossing detected: best residual {best_residual:e} at tau = {tau}")]
    NoSecondaryCrossing { tau: f64, best_residual: f64 },
    #[error("branch derivative estimation failed: {0}")]
    BranchDerivative(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
