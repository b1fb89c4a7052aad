use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("alphabet error: {0}")]
    Alphabet(String),
    #[error("coefficient mode mismatch: {0}")]
    Mode(String),
    #[error("resource guard exceeded: predicted {predicted} terms, limit {limit}")]
    Resource { predicted: usize, limit: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("value not representable exactly: {0}")]
    NotExact(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown {kind} {name:?}")]
    Unknown { kind: &'static str, name: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

/// Default cap on the number of term products a single multiplication may perform.
pub const DEFAULT_GUARD_TERMS: usize = 5_000_000;

/// Resource cap shared by moment computations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Guard {
    pub max_terms: usize,
}

impl Default for Guard {
    fn default() -> Self {
        Guard {
            max_terms: DEFAULT_GUARD_TERMS,
        }
    }
}

impl Guard {
    pub fn new(max_terms: usize) -> Self {
        Guard { max_terms }
    }

    pub fn check(&self, predicted: usize) -> Result<()> {
        if predicted > self.max_terms {
            Err(Error::Resource {
                predicted,
                limit: self.max_terms,
            })
        } else {
            Ok(())
        }
    }
}
