use thiserror::Error;

/// Errors raised anywhere in the rule-learning pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("atom {index} has value {value}, expected -1 or +1")]
    NotBipolar { index: usize, value: i64 },

    #[error("shape mismatch: expected {expected}, got {actual} ({what})")]
    Shape {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid signature: {0}")]
    InvalidSignature(String),

    #[error("model is not thresholded: weight {value} at index {index} is not one of -6, 0, +6")]
    NotThresholded { index: usize, value: f64 },

    #[error("rule {rule} has a non-zero disjunctive weight but an empty conjunction")]
    DegenerateRule { rule: usize },

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown predicate `{name}` at line {line}, column {column}")]
    UnknownPredicate {
        name: String,
        line: usize,
        column: usize,
    },

    #[error("predicate `{name}` expects {expected} argument(s), found {found} at line {line}, column {column}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
        line: usize,
        column: usize,
    },

    #[error("{kind} index {index} out of range (limit {limit})")]
    OutOfRange {
        kind: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("auxiliary predicate c{0}t is used but never defined")]
    UndefinedAux(usize),

    #[error("auxiliary rule for c{0}t refers to another auxiliary predicate")]
    NotStratified(usize),

    #[error("dataset generation failed for seed {seed}: {reason}")]
    Generation { seed: u64, reason: String },

    #[error("malformed document: {0}")]
    Format(String),

    #[error("empty {0}")]
    Empty(&'static str),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("non-finite loss at update {update}: {detail}")]
    Diverged { update: usize, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;
