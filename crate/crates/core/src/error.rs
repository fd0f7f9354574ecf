use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("ODE step size underflow at x = {x}")]
    StepUnderflow { x: f64 },
    #[error("ODE step budget exhausted at x = {x}")]
    TooManySteps { x: f64 },
    #[error("quadrature did not converge (value {value:e}, error estimate {error:e})")]
    QuadratureNotConverged { value: f64, error: f64 },
    #[error("argument out of domain: {0}")]
    OutOfDomain(String),
}

/// Errors surfaced by the laboratory's operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("tortoise root-find did not converge at x = {x}")]
    RootNotConverged { x: f64 },
    #[error("tail classification unavailable: {0}")]
    ClassificationUnavailable(String),

    #[error("lambda = {lambda:e} is below the floor {floor:e}")]
    BelowFloor { lambda: f64, floor: f64 },
    #[error("integration failure: {0}")]
    Integration(#[from] NumericsError),
    #[error("Wronskian inconsistent: spread {spread:e} exceeds {bound:e}")]
    WronskianInconsistent { spread: f64, bound: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("model is resonant; small-lambda fit is meaningless")]
    ResonantModel,

    #[error("accuracy failure: {0}")]
    AccuracyFailure(String),
    #[error("required lambda resolution exceeds the configured maximum; feasible t <= {feasible_t:.3}")]
    ResolutionExceeded { feasible_t: f64 },

    #[error("invalid finite-difference configuration: {0}")]
    InvalidFdConfig(String),
    #[error("finite-difference run unstable at t = {t} (norm growth {growth:e})")]
    Unstable { t: f64, growth: f64 },
    #[error("fields share no common (t, x) points")]
    DisjointGrids,

    #[error("not in the semiclassical regime: {0}")]
    NotInRegime(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("theorem not applicable: {0}")]
    TheoremNotApplicable(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
