use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input bytes are not valid UTF-8.
    #[error("invalid UTF-8 at byte offset {offset}")]
    Decode { offset: usize },

    #[error("malformed token stream: {0}")]
    Structure(String),

    #[error("no such term: {0:?}")]
    NoSuchTerm(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A caller broke a documented precondition (asymmetric matrix and the like).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Wraps another error with the target term it was raised for.
    #[error("while analyzing {term:?}: {source}")]
    Term {
        term: String,
        #[source]
        source: Box<Error>,
    },

    #[error("index format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn for_term(self, term: &str) -> Error {
        match self {
            e @ Error::Term { .. } => e,
            e @ Error::NoSuchTerm(_) => e,
            other => Error::Term {
                term: term.to_string(),
                source: Box::new(other),
            },
        }
    }
}
