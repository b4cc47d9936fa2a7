use std::path::PathBuf;
use std::time::Duration;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failures talking to a remote chat-completions endpoint.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WireError {
    #[error("endpoint returned HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("request timed out after {0:?}")]
    Timeout(Duration),
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("could not decode response: {0}")]
    Decode(String),
}

impl WireError {
    /// HTTP status carried by the error, if the server answered at all.
    pub fn status(&self) -> Option<u16> {
        match self {
            WireError::Status { status, .. } => Some(*status),
            _ => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("speaker must not be empty")]
    EmptySpeaker,
    #[error("speaker {0:?} cannot be written in plain format")]
    UnserializableSpeaker(String),
    #[error("malformed dialog document: {0}")]
    Parse(String),
    #[error("line {line}: expected `Speaker: text`, got {text:?}")]
    BadTurnLine { line: usize, text: String },
    #[error("dialog violates an invariant: {0}")]
    InvalidDialog(String),

    #[error("scripted backend has no responses left")]
    BackendExhausted,
    #[error("backend returned an empty completion")]
    EmptyCompletion,
    #[error(transparent)]
    Wire(#[from] WireError),

    #[error("invalid persona: {0}")]
    InvalidPersona(String),
    #[error("both agents are named {0:?}")]
    DuplicateAgentName(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("completion does not follow the dialog schema: {reason}")]
    SchemaViolation { reason: String, raw: String },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("invalid flowchart: {0}")]
    InvalidFlowchart(String),
    #[error("flowchart has a cycle and no terminal step")]
    CyclicWithoutExit,
    #[error("{} is not a directory", .0.display())]
    NotADirectory(PathBuf),
    #[error("no entry with id {0}")]
    NotFound(u64),
    #[error("unsupported file extension: {}", .0.display())]
    UnknownExtension(PathBuf),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for failures that come from the model backend rather than from
    /// configuration or input data.
    pub fn is_backend(&self) -> bool {
        matches!(
            self,
            Error::BackendExhausted
                | Error::EmptyCompletion
                | Error::Wire(_)
                | Error::SchemaViolation { .. }
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
