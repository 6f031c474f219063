use thiserror::Error;

/// Errors raised by state construction, model building and propagation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Fock cutoff n_max={n_max} too small: truncated tail mass {tail:.3e} exceeds {tol:.3e}")]
    CutoffTooSmall { n_max: usize, tail: f64, tol: f64 },

    #[error("invalid Fock cutoff: {0}")]
    InvalidCutoff(String),

    #[error("bad subsystem dimensions: {0}")]
    BadDims(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid oscillator state: {0}")]
    InvalidOscState(String),

    #[error("negative rate {0}")]
    NegativeRate(f64),

    #[error("field {field} is within {guard:e} of the resonance at {resonance}")]
    OnResonance { field: f64, resonance: f64, guard: f64 },

    #[error("{name} must be positive, got {value}")]
    NonPositiveInput { name: &'static str, value: f64 },

    #[error("trap volume must be positive, got {0}")]
    NonPositiveVolume(f64),

    #[error("qubit-oscillator coupling chi must be nonzero")]
    ZeroChi,

    #[error("RK4 step dt={dt:e} too large: trace drift {drift:.3e}")]
    StepTooLarge { dt: f64, drift: f64 },

    #[error("phase grid is not uniform over [0, 2pi): {0}")]
    NonUniformGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
