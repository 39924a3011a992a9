use thiserror::Error;

/// Errors produced by meshing, assembly, solvers and the experiment harness.
#[derive(Error, Debug)]
pub enum Error {
    #[error("refinement level {0} out of range (max {1})")]
    LevelOutOfRange(usize, usize),

    #[error("cannot lift the zero vector onto a sphere")]
    LiftZeroVector,

    #[error("degenerate triangle {0} (area {1:.3e})")]
    DegenerateTriangle(usize, f64),

    #[error("quadrature degree {0} unsupported (valid: 1..=6)")]
    QuadratureDegree(usize),

    #[error("field value not finite at ({0:.6}, {1:.6}, {2:.6})")]
    NonFiniteField(f64, f64, f64),

    #[error("field has no gradient callable")]
    MissingGradient,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("constraint point off-grid: ({0:.6}, {1:.6}, {2:.6}) is not a mesh vertex")]
    ConstraintOffGrid(f64, f64, f64),

    #[error("constraint point at ({0:.6}, {1:.6}, {2:.6}) lies on the Dirichlet boundary")]
    ConstraintOnBoundary(f64, f64, f64),

    #[error("penalty parameter {0:.3e} below conditioning floor 1e-14")]
    EpsilonBelowFloor(f64),

    #[error("matrix is not upper triangular at entry ({0}, {1})")]
    NotUpperTriangular(usize, usize),

    #[error("factorization failed: zero pivot at elimination index {0}")]
    ZeroPivot(usize),

    #[error("solve did not reach tolerance: relative residual {0:.3e} after {1} refinement steps ({2} regularized pivots)")]
    ToleranceNotMet(f64, usize, usize),

    #[error("probe requires a dense-solvable system: {0} dofs exceeds limit {1}")]
    ProbeTooLarge(usize, usize),

    #[error("exact multiplier has zero norm")]
    ZeroExactMultiplier,

    #[error("eoc inputs must be positive and h1 != h2: E1={0:.3e} E2={1:.3e} h1={2:.3e} h2={3:.3e}")]
    EocInput(f64, f64, f64, f64),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
