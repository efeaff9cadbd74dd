use std::path::PathBuf;

/// Errors raised by the solver library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid material: {0}")]
    InvalidMaterial(String),

    /// `(beta * s)^alpha >= 1`: the strain state lies outside the strain-limit ball.
    #[error("inadmissible strain state: (beta*s)^alpha = {value} >= 1 (s = {s})")]
    InadmissibleStrain { s: f64, value: f64 },

    #[error("invalid mesh parameters: {0}")]
    InvalidMeshSpec(String),

    #[error("singular element {element}: jacobian determinant {det}")]
    SingularElement { element: usize, det: f64 },

    #[error("point ({x}, {y}) lies outside the mesh")]
    PointOutsideDomain { x: f64, y: f64 },

    #[error("radial path leaves the domain at r = {r}")]
    PathOutsideDomain { r: f64 },

    #[error("conflicting constraints on dof {dof}: {first} vs {second}")]
    ConflictingConstraint { dof: usize, first: f64, second: f64 },

    #[error("pure-Neumann problem with incompatible data: net force ({fx}, {fy})")]
    IncompatibleNeumannData { fx: f64, fy: f64 },

    #[error("conjugate gradients did not converge in {iterations} iterations (relative residual {residual:e})")]
    LinearSolveFailed { iterations: usize, residual: f64 },

    #[error("non-finite displacement detected at Picard iteration {iteration}")]
    Divergence { iteration: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("nothing to export: {0} is empty")]
    EmptyData(&'static str),

    #[error("invalid configuration: {key}: {reason}")]
    Config { key: String, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
