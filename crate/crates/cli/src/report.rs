use serde_json::{json, Value};

pub const EXIT_OK: u8 = 0;
pub const EXIT_REFUTED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_CAP: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// The checked property fails; the result carries a counterexample.
    Refuted,
    /// A search cap was hit before a verdict.
    Cap,
}

impl Status {
    fn name(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Refuted => "refuted",
            Status::Cap => "cap_exceeded",
        }
    }

    fn code(self) -> u8 {
        match self {
            Status::Ok => EXIT_OK,
            Status::Refuted => EXIT_REFUTED,
            Status::Cap => EXIT_CAP,
        }
    }
}

/// One verb's answer: a JSON result plus its plain-text rendering.
pub struct Report {
    pub status: Status,
    pub result: Value,
    pub text: String,
}

impl Report {
    pub fn ok(result: Value, text: impl Into<String>) -> Self {
        Report { status: Status::Ok, result, text: text.into() }
    }

    pub fn with_status(mut self, status: Status) -> Self {
        self.status = status;
        self
    }

    pub fn code(&self) -> u8 {
        self.status.code()
    }

    pub fn envelope(&self, verb: &str) -> Value {
        json!({
            "verb": verb,
            "status": self.status.name(),
            "exit_code": self.code(),
            "result": self.result,
        })
    }
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { code: EXIT_USAGE, kind: "usage", message: message.into() }
    }

    /// A library error, prefixed with the file it came from when known.
    pub fn from_core(source: Option<&str>, e: fmtk::Error) -> Self {
        use fmtk::Error as E;
        let kind = match &e {
            E::Syntax { .. } => "syntax",
            E::Arity { .. } => "arity",
            E::OutsideUniverse(_) => "outside_universe",
            E::Duplicate(_) => "duplicate",
            E::Unknown(_) => "unknown",
            E::VocabularyMismatch(_) => "vocabulary_mismatch",
            E::TupleLength(..) => "tuple_length",
            E::Unbound(_) => "unbound",
            E::Capture(_) => "capture",
            E::CapExceeded { .. } => "cap_exceeded",
            E::Invalid(_) => "invalid",
            E::Verification(_) => "verification",
        };
        let code = if matches!(e, E::CapExceeded { .. }) { EXIT_CAP } else { EXIT_USAGE };
        let message = match (source, &e) {
            (Some(src), E::Syntax { line, col, msg }) => format!("{src}:{line}:{col}: {msg}"),
            (Some(src), _) => format!("{src}: {e}"),
            (None, _) => e.to_string(),
        };
        CliError { code, kind, message }
    }

    pub fn envelope(&self, verb: &str) -> Value {
        json!({
            "verb": verb,
            "status": "error",
            "exit_code": self.code,
            "error": { "kind": self.kind, "message": self.message },
        })
    }
}

impl From<fmtk::Error> for CliError {
    fn from(e: fmtk::Error) -> Self {
        CliError::from_core(None, e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
