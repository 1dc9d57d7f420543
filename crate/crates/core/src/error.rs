use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown group `{0}`")]
    UnknownGroup(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("numerical inconsistency: {0}")]
    NumericalInconsistency(String),
    #[error("labels {0:?} are not admissible")]
    NotAdmissible(Vec<usize>),
    #[error("fusion multiplicity greater than one is unsupported")]
    MultiplicityUnsupported,
    #[error("edge {edge} is not incident to vertex {vertex}")]
    NotIncident { edge: usize, vertex: usize },
    #[error("budget exceeded: {needed} terms requested, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("state is not gauge invariant (residual {0:e})")]
    NotGaugeInvariant(f64),
    #[error("state has zero norm")]
    ZeroState,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("not a path: {0}")]
    NotAPath(String),
    #[error("ribbons are not concatenable")]
    NotConcatenable,
    #[error("crossing ribbons are unsupported")]
    CrossingUnsupported,
    #[error("ribbon annihilates the state")]
    ZeroResult,
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("inconsistent gluing: {0}")]
    GluingInconsistent(String),
    #[error("non-manifold edge: {0}")]
    NonManifoldEdge(String),
    #[error("complex has boundary")]
    HasBoundary,
    #[error("inadmissible boundary coloring: {0}")]
    InadmissibleBoundary(String),
    #[error("unsupported structure: {0}")]
    StructureUnsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
