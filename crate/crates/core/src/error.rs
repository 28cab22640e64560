use thiserror::Error;

/// Failures raised by the evaluation, expansion and optimization routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input violates a documented precondition (bad parameter range, wrong policy kind, ...).
    #[error("{0}")]
    InvalidInput(String),

    /// The stationary distribution does not exist (or cannot be certified) for this load.
    #[error("unstable system: {policy} admits an infinite queue at rho = {rho}")]
    Unstable { policy: String, rho: f64 },

    /// A transform or expansion integral diverges at the requested slack.
    #[error("divergent integral: {0}")]
    Divergent(String),

    /// Root bracketing failed: the function has no sign change on the interval.
    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    /// A least-squares system or similar linear solve is singular.
    #[error("singular system: {0}")]
    Singular(String),

    /// An iterative method did not converge or produced a non-finite value.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// True for errors caused by the caller's inputs rather than by numerics.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::InvalidInput(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
