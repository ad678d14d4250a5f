use thiserror::Error;

/// Errors raised by construction and validation of operators, measurements,
/// states and channels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("operator dimension {0} is not supported (expected 2, 4 or 8)")]
    UnsupportedDimension(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("tensor product dimension {0} exceeds the three-qubit limit 8")]
    DimensionOverflow(usize),

    #[error("subsystem index {index} invalid for a {factors}-factor layout")]
    InvalidSubsystem { index: usize, factors: usize },

    #[error("layout of {factors} qubit factors does not match dimension {dim}")]
    LayoutMismatch { factors: usize, dim: usize },

    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("state trace {trace} differs from 1 beyond tolerance")]
    NotUnitTrace { trace: f64 },

    #[error("Bloch vector norm {norm} exceeds 1")]
    BlochNormExceeded { norm: f64 },

    #[error("POVM elements do not sum to the identity (deviation {deviation:e})")]
    IncompletePovm { deviation: f64 },

    #[error("unknown measurement outcome label `{0}`")]
    UnknownOutcome(String),

    #[error("conditional state undefined: outcome `{0}` has zero probability")]
    ZeroProbabilityOutcome(String),

    #[error("map is not completely positive (min Choi eigenvalue {min_choi_eigenvalue:e})")]
    NotCompletelyPositive { min_choi_eigenvalue: f64 },

    #[error("Kraus set is not trace preserving (residual {residual:e})")]
    NotTracePreserving { residual: f64 },

    #[error("Kraus channel must hold between 1 and 4 operators, got {0}")]
    KrausCount(usize),

    #[error("angle {name} = {value} outside its admissible range")]
    AngleOutOfRange { name: &'static str, value: f64 },

    #[error("expected one map per outcome: {expected} outcomes, {got} maps")]
    OutcomeCountMismatch { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("scenario file: {0}")]
    ScenarioParse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
