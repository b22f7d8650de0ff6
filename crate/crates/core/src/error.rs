use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("distance matrix is not square ({rows} rows, row {row} has {len} entries)")]
    NonSquareMatrix { rows: usize, row: usize, len: usize },

    #[error("distance matrix is asymmetric at ({i}, {j}): {a} vs {b}")]
    AsymmetricMatrix { i: usize, j: usize, a: f64, b: f64 },

    #[error("distance matrix has nonzero diagonal entry {value} at {i}")]
    NonzeroDiagonal { i: usize, value: f64 },

    #[error("distance matrix has invalid off-diagonal entry {value} at ({i}, {j})")]
    InvalidOffDiagonal { i: usize, j: usize, value: f64 },

    #[error("triangle inequality violated: d({i},{k}) = {direct} > d({i},{j}) + d({j},{k}) = {detour}")]
    TriangleViolation {
        i: usize,
        j: usize,
        k: usize,
        direct: f64,
        detour: f64,
    },

    #[error("invalid normed space: {0}")]
    InvalidNorm(String),

    #[error("point does not belong to the space: {0}")]
    PointMismatch(String),

    #[error("measures live on different spaces")]
    SpaceMismatch,

    #[error("atom weight must be positive, got {0}")]
    NonPositiveWeight(f64),

    #[error("atom weights sum to {0}, expected 1")]
    WeightSum(f64),

    #[error("duplicate atom at position {0}")]
    DuplicateAtom(usize),

    #[error("measure has no atoms")]
    EmptyMeasure,

    #[error("support size {size} exceeds the brute-force cap {cap}")]
    SupportCapExceeded { size: usize, cap: usize },

    #[error("brute-force and flow results diverge: {brute} vs {flow}")]
    CrossCheckDivergence { brute: f64, flow: f64 },

    #[error("parameter out of range: {0}")]
    InvalidParameter(String),

    #[error("operation requires a normed space")]
    NotNormed,

    #[error("point {0} is not a vertex of the convex hull")]
    NotAVertex(usize),

    #[error("could not find a verified exposing ray")]
    ExposingRayFailure,

    #[error("witness profile does not match the plateau shape: {0}")]
    ProfileShape(String),

    #[error("degenerate partially peeled measure: residual coefficient is zero")]
    DegenerateEta,

    #[error("invalid peel state: {0}")]
    InvalidPeelState(String),

    #[error("reconstruction failed: {0}")]
    Reconstruction(String),

    #[error("not an isometry: {0}")]
    NotIsometry(String),

    #[error("degenerate point configuration: {0}")]
    DegenerateConfiguration(String),

    #[error("image of a Dirac measure has {0} atoms")]
    NonDiracImage(usize),

    #[error("linear program failed: {0}")]
    LinearProgram(String),
}

pub type Result<T> = std::result::Result<T, Error>;
