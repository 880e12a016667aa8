use thiserror::Error;

/// Errors raised by mesh construction, assembly and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("element count along x3 must be even so that a node layer lands on x3 = 0, got {0}")]
    OddLayerCount(usize),

    #[error("non-positive dimension: {0}")]
    NonPositiveDimension(String),

    #[error("solid phase of the cell is not face-connected ({components} components)")]
    DisconnectedSolid { components: usize },

    #[error("cell has an empty {0} phase")]
    EmptyPhase(&'static str),

    #[error("cell has no fluid voxel")]
    NoFluidPhase,

    #[error("unsupported space for this mesh: {0}")]
    UnsupportedSpace(String),

    #[error("dof mismatch: {0}")]
    DofMismatch(String),

    #[error("facet {facet}: resistivity tensor is not symmetric positive definite")]
    SingularPermeability { facet: usize },

    #[error("facet {facet}: {tensor} is not coercive on symmetric matrices")]
    NonCoerciveTensor { facet: usize, tensor: &'static str },

    #[error("inconsistent block offsets: {0}")]
    InconsistentOffsets(String),

    #[error("singular matrix: {0}")]
    SingularMatrix(String),

    #[error("iterative solver stopped after {iterations} iterations with relative residual {residual:e}")]
    MaxIterations { iterations: usize, residual: f64 },

    #[error("orthotropy constraint violated: {0}")]
    ConstraintViolation(String),

    #[error("Darcy fit is singular: {0}")]
    SingularFit(String),

    #[error("linear solve failed: {0}")]
    SolverFailure(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
