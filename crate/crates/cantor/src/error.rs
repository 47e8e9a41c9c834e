//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by exact tree computations.
///
/// Everything that depends on user-provided sizes (levels, depths, radii,
/// budgets) fails loudly with a structured variant; no operation silently
/// truncates or rounds.
#[derive(Debug, Error)]
pub enum Error {
    #[error("digit {digit} out of range at level {level} (arity {arity})")]
    DigitOutOfRange { level: usize, digit: u64, arity: u64 },

    #[error("arity at level {level} does not fit in 64 bits")]
    ArityOverflow { level: usize },

    #[error("invalid spherical index: {0}")]
    InvalidIndex(String),

    #[error("invalid element definition: {0}")]
    InvalidElement(String),

    #[error("operands live on different spherical indices")]
    IndexMismatch,

    #[error("operation needs a constant-arity index, got {0}")]
    NonConstantIndex(String),

    #[error("word reaches depth {depth} but the portrait is only defined to depth {portrait_depth}")]
    BeyondPortraitDepth { depth: usize, portrait_depth: usize },

    #[error("level {level} has {size} vertices, above the cap of {cap} (raise the level cap to proceed)")]
    LevelCapExceeded { level: usize, size: num::BigUint, cap: u64 },

    #[error("work budget of {budget} steps exhausted during {during}")]
    BudgetExhausted { during: &'static str, budget: u64 },

    #[error("search cap of {cap} candidates exhausted during {during}")]
    SearchCapExceeded { during: &'static str, cap: u64 },

    #[error("element does not fix the vertex {vertex}")]
    VertexNotFixed { vertex: String },

    #[error("unknown catalog example '{0}'")]
    UnknownExample(String),

    #[error("unknown fact '{fact}' for catalog example '{example}'")]
    UnknownFact { example: String, fact: String },

    #[error("generator labels differ: {0}")]
    GeneratorMismatch(String),

    #[error("search exhausted without reaching the target: {0}")]
    SearchExhausted(String),

    #[error("{0}")]
    Unsupported(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
