use thiserror::Error;

/// Crate-wide error type.
///
/// `Invalid` marks precondition violations (bad arguments, wrong mode,
/// unsatisfied support conditions); `Numerical` marks failures of an
/// otherwise well-posed computation (step-size underflow, exhausted step
/// budget). CLI exit codes map onto this split.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Adaptive stepping drove the step size below the representable
    /// minimum. The state at the last accepted step is preserved so the
    /// caller can inspect how far the integration got.
    #[error("step size underflow at tau = {tau}")]
    StepUnderflow {
        tau: f64,
        last_state: Box<crate::coeffs::CoefficientState>,
    },

    /// The requested local tolerance could not be met within the step budget.
    #[error("step budget of {budget} steps exhausted at tau = {tau}")]
    StepBudget {
        tau: f64,
        budget: u64,
        last_state: Box<crate::coeffs::CoefficientState>,
    },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// True for precondition violations, false for numerical failures.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Invalid(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
