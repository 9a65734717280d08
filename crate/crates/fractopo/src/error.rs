//! Error type shared across the crate.

use crate::word::Word;

/// Everything that can go wrong during an analysis run.
///
/// `Resource` and `Inconclusive` are ordinary outcomes for hard inputs, not
/// bugs: callers are expected to branch on them (the CLI maps them to
/// dedicated exit codes).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("letter {letter} out of range 1..={m}")]
    LetterOutOfRange { letter: u8, m: usize },

    #[error("map is not contracting (ratio {ratio})")]
    NonContracting { ratio: f64 },

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what} budget exceeded ({used} used); achievable tolerance {achieved}")]
    Resource {
        what: &'static str,
        used: usize,
        achieved: f64,
    },

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("refinement gluing must be injective: {0} glued twice")]
    GluingNotInjective(Word),

    #[error("validation: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
