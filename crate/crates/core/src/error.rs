use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpinChainError {
    #[error("invalid parameter `{name}`: {reason}")]
    Domain { name: &'static str, reason: String },

    #[error("chain of {n} qubits exceeds the supported maximum of {cap}")]
    TooManyQubits { n: usize, cap: usize },

    #[error("basis index {index} out of range for {n} qubits")]
    BasisOutOfRange { index: usize, n: usize },

    #[error("transition between a state and itself is undefined")]
    IdenticalStates,

    #[error("qubit index {qubit} out of range 1..={n}")]
    QubitOutOfRange { qubit: usize, n: usize },

    #[error("state vector is not normalized (norm² = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("dimension mismatch: expected {expected} amplitudes, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("adaptive integrator step size underflow at tau = {tau} (h = {step})")]
    StepUnderflow { tau: f64, step: f64 },

    #[error("spectrum ordering violated: {0}")]
    SpectrumOrdering(String),

    #[error("CNOT pulse requires {0}")]
    CnotPrecondition(&'static str),

    #[error("invalid sweep: {0}")]
    Sweep(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl SpinChainError {
    pub(crate) fn domain(name: &'static str, reason: impl Into<String>) -> Self {
        SpinChainError::Domain {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerical engine rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            SpinChainError::StepUnderflow { .. } | SpinChainError::SpectrumOrdering(_)
        )
    }
}

impl From<std::io::Error> for SpinChainError {
    fn from(e: std::io::Error) -> Self {
        SpinChainError::Io(e.to_string())
    }
}

impl From<csv::Error> for SpinChainError {
    fn from(e: csv::Error) -> Self {
        SpinChainError::Io(e.to_string())
    }
}

pub type Result<T, E = SpinChainError> = std::result::Result<T, E>;
