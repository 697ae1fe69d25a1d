use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("arity mismatch for {name}: expected {expected}, got {got}")]
    Arity { name: String, expected: usize, got: usize },
    #[error("element {0} outside the universe")]
    OutsideUniverse(u32),
    #[error("duplicate symbol {0}")]
    Duplicate(String),
    #[error("unknown symbol {0}")]
    Unknown(String),
    #[error("vocabulary mismatch: {0}")]
    VocabularyMismatch(String),
    #[error("tuple length mismatch: {0} vs {1}")]
    TupleLength(usize, usize),
    #[error("unbound variable {0}")]
    Unbound(String),
    #[error("variable capture on {0}")]
    Capture(String),
    #[error("cap exceeded: {what} is {actual}, limit {limit}")]
    CapExceeded { what: String, actual: usize, limit: usize },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn cap(what: impl Into<String>, actual: usize, limit: usize) -> Self {
        Error::CapExceeded { what: what.into(), actual, limit }
    }
}

/// Work limits. Exceeding any of them is an error, never a truncated answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    /// Largest universe for FO evaluation and FO types.
    pub fo_universe: usize,
    /// Largest universe once set quantifiers are involved.
    pub mso_universe: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { fo_universe: 12, mso_universe: 10 }
    }
}

impl Caps {
    pub fn with_fo(fo_universe: usize) -> Self {
        Caps { fo_universe, ..Caps::default() }
    }

    pub(crate) fn check(&self, universe: usize, mso: bool) -> Result<()> {
        if mso {
            let limit = self.mso_universe.min(63);
            if universe > limit {
                return Err(Error::cap("MSO universe", universe, limit));
            }
        } else if universe > self.fo_universe {
            return Err(Error::cap("FO universe", universe, self.fo_universe));
        }
        Ok(())
    }
}
