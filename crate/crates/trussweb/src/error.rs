use std::fmt;

/// Where in a text document a problem was found. Lines and columns are 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Position {
    pub line: u64,
    pub column: Option<usize>,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.column {
            Some(c) => write!(f, "line {}, column {}", self.line, c),
            None => write!(f, "line {}", self.line),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{at}: {message}")]
    Parse { at: Position, message: String },
    #[error(transparent)]
    Core(#[from] trussweb_core::Error),
    #[error("invalid model: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("{0}")]
    Request(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(line: u64, column: Option<usize>, message: impl Into<String>) -> Self {
        Error::Parse { at: Position { line, column }, message: message.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
