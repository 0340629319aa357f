use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An input vector does not match the width it is paired with.
    #[error("input has length {found}, expected {expected}")]
    Shape { expected: usize, found: usize },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// A configured enumeration or size budget would be exceeded.
    #[error("budget exceeded for {what}: needs {needed}, limit is {limit}")]
    Budget {
        what: String,
        needed: String,
        limit: String,
    },

    /// Malformed node graph (dangling child, cycle, bad variable index).
    #[error("malformed tree: {0}")]
    Structure(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    pub(crate) fn budget(
        what: impl Into<String>,
        needed: impl ToString,
        limit: impl ToString,
    ) -> Self {
        Error::Budget {
            what: what.into(),
            needed: needed.to_string(),
            limit: limit.to_string(),
        }
    }

    pub fn is_budget(&self) -> bool {
        matches!(self, Error::Budget { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Shape { expected, found })
    }
}
