use thiserror::Error;

/// Errors raised by the numerical kernels, the solver and the file formats.
#[derive(Debug, Error)]
pub enum MfgError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite value at index {index} ({context})")]
    NonFinite { index: usize, context: &'static str },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("nonpositive density {value:e} at node {node}, slice {slice}")]
    NonPositiveDensity { node: usize, slice: usize, value: f64 },

    #[error("maximizer on the boundary of the sampled ball (radius {radius}); enlarge the sampling radius")]
    BoundaryMaximizer { radius: f64 },

    #[error("singular linear system (smallest singular value {smallest_singular_value:e})")]
    Singular { smallest_singular_value: f64 },

    #[error("operator assembly exceeds the memory budget ({unknowns} unknowns)")]
    BudgetExceeded { unknowns: usize },

    #[error("linear solver did not converge: {0}")]
    LinearSolver(String),

    #[error("Newton did not converge after {iterations} iterations (residual {residual:e})")]
    NewtonFailed { iterations: usize, residual: f64 },

    #[error("positivity of the density lost and not recoverable by damping")]
    PositivityLost,

    #[error("integrator produced non-finite coefficients at step {0}")]
    IntegratorBlowUp(usize),

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("field file: {0}")]
    FieldFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl MfgError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        MfgError::Config { field: field.into(), message: message.into() }
    }
}

pub type Result<T> = std::result::Result<T, MfgError>;
