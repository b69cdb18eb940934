use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix is singular (relative pivot below threshold)")]
    Singular,
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("polynomial depends on a variable that is not allowed here (variable index {var})")]
    BadVariableSupport { var: usize },
    #[error("unknown builtin potential `{0}`")]
    UnknownBuiltin(String),
    #[error("invalid rational literal `{0}`")]
    BadRational(String),
    #[error("invalid Gram specification: {0}")]
    InvalidGramSpec(String),
    #[error("assembled normal Gram matrix is degenerate")]
    SingularAssembly,
    #[error("frame Gram drift {drift:e} exceeded limit near u = {at:?}")]
    StepTooLarge { at: Vec<f64>, drift: f64 },
    #[error("grid too coarse: need at least 3 nodes per axis, axis {axis} has {nodes}")]
    GridTooCoarse { axis: usize, nodes: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
}
