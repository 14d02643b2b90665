//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised while constructing or querying models.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("invalid identifier '{0}': identifiers must be nonempty and free of whitespace, commas, parentheses and braces")]
    InvalidIdentifier(String),

    #[error("duplicate identifier '{0}'")]
    DuplicateIdentifier(String),

    #[error("unknown state '{0}'")]
    UnknownState(String),

    #[error("unknown event '{0}'")]
    UnknownEvent(String),

    #[error("event '{0}' is not observable")]
    NotObservable(String),

    #[error("vulnerable event '{0}' is not observable")]
    VulnerableNotObservable(String),

    #[error("nondeterministic transition: state '{state}' has two targets on event '{event}'")]
    Nondeterministic { state: String, event: String },

    #[error("initial state '{0}' is not a declared state")]
    InitialNotDeclared(String),

    #[error("secret initial state '{0}' is not an initial state")]
    SecretNotInitial(String),

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("state identifier '{0}' is reserved")]
    ReservedState(String),

    #[error("supervisor violates its realization conditions: {0}")]
    InvalidSupervisor(String),

    #[error("attack strategy violated its contract: {0}")]
    StrategyContract(String),

    #[error("event '{event}' is disabled at state '{state}'")]
    DisabledEvent { state: String, event: String },

    #[error("malformed extended string: {0}")]
    MalformedExtendedString(String),

    #[error("search exceeded the configured limit of {0} nodes")]
    LimitExceeded(u64),

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, ModelError>;

/// Characters that may not appear in state/event identifiers. Keeping
/// identifiers free of separators makes composite state names, printed
/// estimate sets and CLI trace arguments unambiguous.
pub(crate) fn check_identifier(id: &str) -> Result<()> {
    let bad = id.is_empty()
        || id
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, ',' | '(' | ')' | '{' | '}'));
    if bad {
        Err(ModelError::InvalidIdentifier(id.to_string()))
    } else {
        Ok(())
    }
}
