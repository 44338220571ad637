use thiserror::Error;

/// A system or certificate violates a structural invariant.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("undeclared state `{0}`")]
    UndeclaredState(String),
    #[error("state index {index} out of range for {len} states")]
    StateOutOfRange { index: usize, len: usize },
    #[error("probabilities at `{state}` sum to {sum}, expected 1")]
    ProbabilitySum { state: String, sum: String },
    #[error("non-positive probability {value} at `{state}`")]
    NonPositiveProbability { state: String, value: String },
    #[error("successor `{successor}` listed twice at `{state}`")]
    DuplicateSuccessor { state: String, successor: String },
    #[error("symbol `{symbol}` has arity {arity} but `{state}` lists {found} children")]
    ArityMismatch {
        state: String,
        symbol: String,
        arity: usize,
        found: usize,
    },
    #[error("duplicate symbol `{0}`")]
    DuplicateSymbol(String),
    #[error("undeclared symbol `{0}`")]
    UndeclaredSymbol(String),
    #[error("state `{0}` has no transition")]
    MissingTransition(String),
    #[error("certificate does not cover state `{0}`")]
    MissingValue(String),
    #[error("certificate names unknown state `{0}`")]
    UnknownValue(String),
    #[error("certificate covers {found} states, system has {expected}")]
    Coverage { expected: usize, found: usize },
    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),
}
