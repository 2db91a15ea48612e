use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Why a single line of a word-vector file was rejected.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum VectorParseError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("dimension mismatch: expected {expected} components, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("duplicate token {0:?}")]
    DuplicateToken(String),
    #[error("non-finite component for token {0:?}")]
    NonFinite(String),
    #[error("cannot parse component {value:?} for token {token:?}")]
    BadNumber { token: String, value: String },
    #[error("header declares {expected} vectors, file contains {found}")]
    CountMismatch { expected: usize, found: usize },
    #[error("line is not valid UTF-8")]
    InvalidUtf8,
    #[error("empty line")]
    EmptyLine,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Stream(#[from] std::io::Error),

    #[error("vector file line {line}: {kind}")]
    VectorParse { line: usize, kind: VectorParseError },

    #[error("word vector {0:?} has zero norm")]
    ZeroNormVector(String),

    #[error("line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("word {0:?} is not counted in the corpus")]
    UnknownWord(String),

    #[error("corpus has no documents")]
    EmptyCorpus,

    #[error("all counted words share the same idf; scaled idf is undefined")]
    DegenerateScale,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("document has no embeddable tokens")]
    EmptyDocument,

    #[error("embedding coefficients have norm {norm:e}, below tolerance")]
    ZeroNormEmbedding { norm: f64 },

    #[error("corpus center was built for {built}, used with {requested}")]
    SchemeMismatch { built: String, requested: String },

    #[error("vector store and corpus statistics share no tokens")]
    NoSharedTokens,

    #[error("need at least 2 rows for principal component extraction, got {0}")]
    TooFewRows(usize),

    #[error("matrix contains a non-finite entry")]
    NonFiniteInput,

    #[error("matrix has no nonzero direction")]
    ZeroMatrix,

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("AUC undefined: {positives} positive and {negatives} negative labels")]
    UndefinedAuc { positives: usize, negatives: usize },

    #[error("group {group:?} has {available} documents, needs {needed}")]
    InsufficientDocuments {
        group: String,
        needed: usize,
        available: usize,
    },

    #[error("invalid grouped corpus: {0}")]
    InvalidCorpus(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
