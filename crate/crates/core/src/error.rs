use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("quadrature failure: kernel mass {mass} deviates from 1 by more than {tolerance}")]
    QuadratureFailure { mass: f64, tolerance: f64 },

    #[error("spacing h = {h} does not divide extent {extent} on axis {axis}")]
    IncompatibleSpacing { h: f64, extent: f64, axis: usize },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("fields or operators live on different grids")]
    GridMismatch,

    #[error("kernel support unresolved: delta/h = {ratio:.3} < 4")]
    SupportUnresolved { ratio: f64 },

    #[error("ghost band {ghost_width} narrower than delta = {delta}")]
    GhostBandTooNarrow { ghost_width: f64, delta: f64 },

    #[error("axis {axis} has {nodes} nodes, at least 3 are required")]
    TooFewNodes { axis: usize, nodes: usize },

    #[error("mismatched operators: {0}")]
    MismatchedOperators(String),

    #[error("snapshot time {time} is not an integer multiple of dt = {dt} from the start")]
    NonMultipleSnapshot { time: f64, dt: f64 },

    #[error("solution blew up at t = {time} (sup norm {norm:e})")]
    BlowUp { time: f64, norm: f64 },

    #[error("no convergence after {iterations} iterations (last ratio {last_ratio})")]
    NoConvergence { iterations: usize, last_ratio: f64 },

    #[error("iteration collapsed to zero after {periods} periods")]
    CollapsedToZero { periods: usize },

    #[error("(H2) fails: principal value {lambda} is not positive")]
    H2Failure { lambda: f64 },

    #[error("linear solve stalled after {iterations} iterations (relative residual {residual:e})")]
    LinearSolve { iterations: usize, residual: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Numerical failures (as opposed to invalid input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::QuadratureFailure { .. }
                | Error::BlowUp { .. }
                | Error::NoConvergence { .. }
                | Error::CollapsedToZero { .. }
                | Error::H2Failure { .. }
                | Error::LinearSolve { .. }
        )
    }
}
