use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    /// A log-space tail computation underflowed to a non-finite value.
    #[error("numeric underflow in {func}: {detail}")]
    Underflow { func: &'static str, detail: String },

    /// An iterative method failed to converge.
    #[error("{func} did not converge: {detail}")]
    NoConvergence { func: &'static str, detail: String },

    #[error("adaptive quadrature did not reach tolerance: estimate {estimate:e}, error {error:e} after {intervals} intervals")]
    Quadrature {
        estimate: f64,
        error: f64,
        intervals: usize,
    },

    #[error("invalid model: {0}")]
    ModelInvalid(String),

    /// A quantity is undefined for the given input, e.g. the dispersion of an isolated node.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("index {index} out of range for length {len}")]
    Index { index: usize, len: usize },

    #[error("sparse regime requires gamma in (0, 1/2] and zeta' = 0, got gamma = {gamma}, zeta' = {zeta_prime}")]
    Regime { gamma: f64, zeta_prime: f64 },

    #[error("k_max = {k_max} leaves tail mass {tail:e} above {limit:e}")]
    KMaxTooSmall { k_max: usize, tail: f64, limit: f64 },

    #[error("expected edge count {expected:.0} exceeds the stored-edge budget of {cap}")]
    MemoryBudget { expected: f64, cap: usize },

    #[error("degree sum is zero; the estimator is undefined for an empty graph")]
    EmptyGraph,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Input file or configuration could not be parsed or validated.
    #[error("{location}: {message}")]
    Config { location: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            func,
            detail: detail.into(),
        }
    }

    pub(crate) fn config(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            location: location.into(),
            message: message.into(),
        }
    }

    /// True for failures of floating point machinery rather than of user input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Underflow { .. }
                | Error::NoConvergence { .. }
                | Error::Quadrature { .. }
                | Error::KMaxTooSmall { .. }
        )
    }
}
