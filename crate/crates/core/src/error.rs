use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh resolution must be at least 1, got {0}")]
    InvalidResolution(usize),

    #[error("cell index {index} out of range (mesh has {count} cells)")]
    CellOutOfRange { index: usize, count: usize },

    #[error("point ({0}, {1}) lies outside the reference triangle")]
    PointOutsideReference(f64, f64),

    #[error("unsupported element order k = {0} (expected 1 or 2)")]
    UnsupportedOrder(usize),

    #[error("invalid damping law: {0}")]
    InvalidDampingLaw(String),

    #[error("damping jacobian is singular at v = 0 for exponent p = {0} < 2")]
    SingularJacobian(f64),

    #[error("damping law does not grow linearly for large velocity; {0}")]
    NoLinearGrowth(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("invalid solver configuration: {0}")]
    InvalidSolverConfig(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("newton iteration did not converge after {iterations} iterations (residual {residual:.3e}, tolerance {tolerance:.3e})")]
    NewtonDiverged {
        iterations: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("linear solver failed: {0}")]
    LinearSolver(String),

    #[error("time step {step} (t = {time}) failed: {source}")]
    StepFailed {
        step: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("fit window [{lo}, {hi}] holds {count} usable samples, need at least {needed}")]
    FitWindowTooShort {
        lo: f64,
        hi: f64,
        count: usize,
        needed: usize,
    },

    #[error("invalid decay-theory input: {0}")]
    InvalidDecayInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed trace: {0}")]
    MalformedTrace(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors raised while integrating in time (as opposed to bad input).
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::NewtonDiverged { .. } | Error::LinearSolver(_) | Error::StepFailed { .. }
        )
    }
}
