use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unknown builtin `{0}`")]
    UnknownBuiltin(String),
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("invalid structure: {0}")]
    InvalidStructure(String),
    #[error("template has {0} elements; at most 64 are supported by the solver")]
    TemplateTooLarge(usize),
    #[error("template is not a core")]
    NotACore,
    #[error("instance has no homomorphism into the template")]
    Unsatisfiable,
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("clause {clause} contains a variable together with its negation")]
    ComplementaryLiterals { clause: usize },
    #[error("edge {{{0}, {1}}} lies in no triangle")]
    UntriangulatedEdge(usize, usize),
    #[error("special vertex is coloured {0}, expected 2")]
    NotNormalized(usize),
    #[error("linkage structure violated: {0}")]
    Linkage(String),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("graph has no edges")]
    NoEdges,
    #[error("table is not associative at ({0}, {1}, {2})")]
    NotAssociative(usize, usize, usize),
    #[error("invalid semigroup table: {0}")]
    InvalidTable(String),
    #[error("resource guard exceeded: {what} (limit {limit})")]
    Guard { what: String, limit: usize },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Io(String),
    #[error("{stage} stage: {source}")]
    Stage { stage: String, source: Box<Error> },
}

impl Error {
    pub fn guard(what: impl Into<String>, limit: usize) -> Self {
        Error::Guard { what: what.into(), limit }
    }

    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }

    /// The underlying error with stage attribution removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
