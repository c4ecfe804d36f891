use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report. Each variant maps onto a stable,
/// machine-readable code (see [`Error::code`]) used by the CLI and the C ABI.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("operator is not Hermitian: max |H - H^dagger| = {residual:e}")]
    NotHermitian { residual: f64 },

    #[error("invalid density operator: {reason} (residual {residual:e})")]
    InvalidState { reason: String, residual: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("observables {first} and {second} do not commute (max residual {residual:e})")]
    CommutativityViolation {
        first: usize,
        second: usize,
        residual: f64,
    },

    #[error("invalid hashing: {0}")]
    InvalidHashing(String),

    #[error("function value is undefined or non-finite at point {point:?}")]
    NonFinite { point: Vec<f64> },

    #[error("axis {axis} out of range for a {n_axes}-axis distribution")]
    AxisOutOfRange { axis: usize, n_axes: usize },

    #[error("expansion needs {products} projector products, budget is {budget}")]
    ResourceBudget { products: u128, budget: u64 },

    #[error("kernel mass {mass} deviates from 1")]
    KernelMass { mass: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("every conditioning atom fell below the threshold {threshold:e}")]
    DegenerateConditioning { threshold: f64 },

    #[error("post-selection probability {probability:e} is below the threshold {threshold:e}")]
    DegeneratePostSelection { probability: f64, threshold: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("schema violation at {pointer}: {message}")]
    Schema { pointer: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidOperator(_) => "invalid-operator",
            Error::NotHermitian { .. } => "not-hermitian",
            Error::InvalidState { .. } => "invalid-state",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::CommutativityViolation { .. } => "commutativity-violation",
            Error::InvalidHashing(_) => "invalid-hashing",
            Error::NonFinite { .. } => "non-finite",
            Error::AxisOutOfRange { .. } => "axis-out-of-range",
            Error::ResourceBudget { .. } => "resource-budget",
            Error::KernelMass { .. } => "kernel-mass",
            Error::InvalidGrid(_) => "invalid-grid",
            Error::DegenerateConditioning { .. } => "degenerate-conditioning",
            Error::DegeneratePostSelection { .. } => "degenerate-post-selection",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::Schema { .. } => "schema-violation",
            Error::Io { .. } => "unreadable-file",
        }
    }

    pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
        if expected == found {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, found })
        }
    }
}
