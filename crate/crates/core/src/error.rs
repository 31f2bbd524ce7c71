use thiserror::Error;

/// Errors raised by the fiber, metric and experiment routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("Jacobi eigensolver did not converge within {0} sweeps")]
    NoConvergence(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix entries must be finite")]
    NonFinite,

    #[error("trace is {0}, expected 1")]
    InvalidTrace(f64),

    #[error("eigenvalue {0:e} is negative beyond clamping tolerance")]
    NotPositive(f64),

    #[error("expected {expected} parameters, found {found}")]
    BadParameterCount { expected: usize, found: usize },

    #[error("parameter index {index} out of range for {count} parameters")]
    BadParameterIndex { index: usize, count: usize },

    #[error("Gram determinant {0:e} is negative")]
    NegativeDeterminant(f64),

    #[error("determinant has imaginary residue {0:e}")]
    ComplexDeterminant(f64),

    #[error("{0} parameters exceeds the tensor-product quadrature limit of 12; use monte-carlo")]
    UnsupportedDimension(usize),

    #[error("not a probability vector: {0}")]
    NotAProbabilityVector(String),

    #[error("entropy {value} bits outside [0, {max}]")]
    OutOfRangeEntropy { value: f64, max: f64 },

    #[error("{value} outside the domain [{lo}, {hi}]")]
    OutOfDomain { value: f64, lo: f64, hi: f64 },

    #[error("normalized volume never reaches the cutoff for N = {0}")]
    NoRoot(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
