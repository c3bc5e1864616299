use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ALE map degenerate (J = {jacobian:.3e}) in cell {cell}")]
    MeshEntanglement { cell: usize, jacobian: f64 },

    #[error("singular matrix{}", match .pivot { Some(p) => format!(" (pivot {p})"), None => String::new() })]
    SingularMatrix { pivot: Option<usize> },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("Newton line search failed at iteration {iteration} (residual {residual:.3e})")]
    LineSearchFailure { iteration: usize, residual: f64 },

    #[error("Newton did not converge in {iterations} iterations (residual {residual:.3e}, target {target:.3e})")]
    NewtonNonConvergence {
        iterations: usize,
        residual: f64,
        target: f64,
    },

    #[error("time step {step} (t = {time}) failed: {source}")]
    TimeStep {
        step: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("point ({x}, {y}) is outside the mesh")]
    PointOutside { x: f64, y: f64 },

    #[error("boundary condition refers to marker `{0}` which is absent from the mesh")]
    UnknownMarker(String),

    #[error("invalid control q = {0:?}: shear modulus must be positive")]
    InvalidControl(Vec<f64>),

    #[error("forward solve failed for q = {q:?}: {source}")]
    ForwardFailure {
        q: Vec<f64>,
        #[source]
        source: Box<Error>,
    },

    #[error("Armijo search exhausted {trials} trials at iteration {iteration} (J = {value:.6e}, |grad| = {grad_norm:.6e})")]
    ArmijoFailure {
        iteration: usize,
        trials: usize,
        value: f64,
        grad_norm: f64,
    },

    #[error("trajectory mismatch: {0}")]
    Trajectory(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("mesh format error at line {line}: {message}")]
    MeshFormat { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Strips step/forward wrappers down to the originating failure.
    pub fn root(&self) -> &Error {
        match self {
            Error::TimeStep { source, .. } | Error::ForwardFailure { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
