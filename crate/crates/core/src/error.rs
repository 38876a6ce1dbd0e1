use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unknown verb `{0}`")]
    UnknownVerb(String),

    #[error("invalid verb token `{0}`: expected a non-empty lowercase token without commas or whitespace")]
    InvalidVerb(String),

    #[error("duplicate verb `{0}` in lexicon")]
    DuplicateVerb(String),

    #[error("lexicon mismatch: tables are defined over different verb lists")]
    LexiconMismatch,

    #[error("invalid count for `{verb}`: do_count {do_count} exceeds total {total}")]
    InvalidCount { verb: String, do_count: u64, total: u64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("corpus contains no observations")]
    EmptyCorpus,

    #[error("cannot sample from a prior with zero total count")]
    DegeneratePrior,

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Process exit code: 3 for data and parse problems, 4 for numerical
    /// failures. Usage errors (2) are raised by the argument parser.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::DegeneratePrior => 4,
            Error::Config(_) => 2,
            _ => 3,
        }
    }
}
