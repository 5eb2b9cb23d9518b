use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not symmetric: max asymmetry {asymmetry:e} exceeds {tolerance:e}")]
    NotSymmetric { asymmetry: f64, tolerance: f64 },

    #[error("non-finite entry in input")]
    NonFinite,

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal residual {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("matrix is not positive semidefinite: offending eigenvalues {offending:?}")]
    NotPsd { offending: Vec<f64> },

    #[error("matrix is only positive semidefinite (min eigenvalue {min_eigenvalue:e}); {operation} needs strictly positive eigenvalues")]
    PsdOnly { min_eigenvalue: f64, operation: &'static str },

    #[error("zero eigenvalue raised to non-positive power {power}")]
    ZeroToNonPositivePower { power: f64 },

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("degenerate instance: {0}")]
    Degenerate(&'static str),

    #[error("instance is not normalized: {0}")]
    NotNormalized(&'static str),

    #[error("parameter {name} = {value} outside {range}")]
    OutOfRange { name: &'static str, value: f64, range: &'static str },

    #[error("no refinement certified: spectral distance {d} is not positive")]
    NoRefinement { d: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("infeasible constraint: {0}")]
    Infeasible(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_range(name: &'static str, value: f64, lo: f64, hi: f64, open: bool) -> Result<()> {
    let ok = if open { value > lo && value < hi } else { value >= lo && value <= hi };
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            range: if open { "open interval (0, 1)" } else { "closed interval [0, 1]" },
        })
    }
}
