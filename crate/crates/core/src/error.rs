use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Error)]
pub enum LabError {
    /// A precondition of an operation was violated by its arguments.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The requested construction needs more atoms (or nodes) than allowed.
    #[error("resource budget exceeded: {what} needs {required}, budget is {budget}")]
    Budget {
        what: &'static str,
        required: u128,
        budget: u128,
    },

    /// A quadrature node count is below the Nyquist-type floor.
    #[error("quad_nodes = {given} is below the required minimum {required}")]
    NodeFloor { given: usize, required: usize },

    /// An adaptive routine ran out of its refinement budget.
    #[error("no convergence: {0}")]
    NoConvergence(String),

    /// A numerical self-check failed (bad construction, not bad input).
    #[error("numerical check failed: {0}")]
    CheckFailed(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl LabError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        LabError::InvalidInput(msg.into())
    }

    /// True when the error signals resource exhaustion rather than bad math.
    pub fn is_resource(&self) -> bool {
        matches!(self, LabError::Budget { .. })
    }
}
