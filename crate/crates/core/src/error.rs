use alloc::string::String;
use alloc::vec::Vec;

use crate::shift::Vertex;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("vertex {vertex} is outside the vertex set 0..{count}")]
    VertexOutOfRange { vertex: Vertex, count: usize },
    #[error("vertex {vertex} has no outgoing edge (empty shift)")]
    NoOutgoingEdge { vertex: Vertex },
    #[error("empty word")]
    EmptyWord,
    #[error("word is not admissible: no edge {from} -> {to}")]
    InadmissibleWord { from: Vertex, to: Vertex },
    #[error("length must be positive")]
    ZeroLength,
    #[error("enumeration would exceed the budget of {limit} words")]
    EnumerationBudget { limit: usize },
    #[error("power iteration did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("vertex {vertex} lies on no loop up to length {horizon}")]
    NoLoops { vertex: Vertex, horizon: usize },
    #[error("all loop counts are zero")]
    AllCountsZero,
    #[error("loop counts are not summable at the cutoff (infinite entropy)")]
    InfiniteEntropy,
    #[error("entropy exceeds the search cap of {cap} nats")]
    EntropyAboveCap { cap: f64 },
    #[error("a loop graph can carry at most one loop of length 1, got {count}")]
    MultipleSelfLoops { count: String },
    #[error("realized loop graph would exceed {limit} vertices")]
    LoopGraphTooLarge { limit: usize },
    #[error("row {row} is not a probability vector")]
    NotStochastic { row: usize },
    #[error("matrix shape does not match support of size {expected}")]
    ShapeMismatch { expected: usize },
    #[error("transition {from} -> {to} is not an edge of the shift")]
    TransitionOffGraph { from: Vertex, to: Vertex },
    #[error("support is reducible; components: {components:?}")]
    Reducible { components: Vec<Vec<Vertex>> },
    #[error("supplied vector is not stationary (residual {residual:e})")]
    NotStationary { residual: f64 },
    #[error("measure {index} is not ergodic")]
    NonErgodic { index: usize },
    #[error("measures live on incompatible specs: {0}")]
    Incompatible(String),
    #[error("potential is undefined on word {word:?}")]
    PotentialUndefined { word: Vec<Vertex> },
    #[error("depth mismatch: function depth {function} exceeds roof depth {roof}")]
    DepthMismatch { function: usize, roof: usize },
    #[error("cylinder [{vertex}] has zero mass")]
    NullBase { vertex: Vertex },
    #[error("word is not bracketed by the base vertex {base}")]
    NotBracketed { base: Vertex },
    #[error("block of interior length {length} exceeds the horizon {horizon}")]
    BlockTooLong { length: usize, horizon: usize },
    #[error("flow measures use different roof functions")]
    MixedRoofs,
    #[error("sequence needs at least {needed} members, got {got}")]
    SequenceTooShort { needed: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = core::result::Result<T, Error>;
