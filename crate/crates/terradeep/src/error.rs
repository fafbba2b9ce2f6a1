use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by the toolkit.
///
/// Variants map onto the CLI exit-code policy: usage problems are caught by
/// the argument parser before any of these are constructed, data and format
/// problems exit with code 2, and internal invariant violations exit with
/// code 3.
#[derive(Debug, Error)]
pub enum Error {
    /// Two tensor shapes that must agree do not.
    #[error("shape mismatch: {context} (left {left:?}, right {right:?})")]
    ShapeMismatch {
        context: &'static str,
        left: Vec<usize>,
        right: Vec<usize>,
    },

    /// A single tensor has a shape an operation cannot accept.
    #[error("bad shape: {0}")]
    Shape(String),

    /// An operation parameter is out of its documented range.
    #[error("bad parameter: {0}")]
    Parameter(String),

    /// A dataset violates a structural requirement (empty, missing class,
    /// label out of range, ...).
    #[error("bad dataset: {0}")]
    Dataset(String),

    /// A sensor value falls outside its physical range and the frame must be
    /// dropped by the caller.
    #[error("outlier value {value} outside [{lo}, {hi}]")]
    Outlier { value: f64, lo: f64, hi: f64 },

    /// An input file does not match its documented format.
    #[error("format error in {path}{}: {msg}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Format {
        path: String,
        line: Option<usize>,
        msg: String,
    },

    /// A label index is outside the declared class range.
    #[error("label {label} out of range for {classes} classes")]
    Label { label: usize, classes: usize },

    /// Requested model-zoo entry does not exist.
    #[error("unknown zoo entry '{name}', valid names: {valid}")]
    Catalog { name: String, valid: String },

    /// Training or inference state does not match what an operation expects.
    #[error("state error: {0}")]
    State(String),

    /// A numeric invariant (finite values, probability normalization, ...)
    /// was violated; indicates a bug, not bad input.
    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn shape_mismatch(
        context: &'static str,
        left: &[usize],
        right: &[usize],
    ) -> Self {
        Error::ShapeMismatch {
            context,
            left: left.to_vec(),
            right: right.to_vec(),
        }
    }

    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Prefix the message of a string-carrying variant without changing its
    /// class, so exit codes still reflect the underlying failure; structured
    /// variants pass through untouched.
    pub fn with_context(self, tag: &str) -> Self {
        match self {
            Error::Shape(m) => Error::Shape(format!("{tag}{m}")),
            Error::Parameter(m) => Error::Parameter(format!("{tag}{m}")),
            Error::Dataset(m) => Error::Dataset(format!("{tag}{m}")),
            Error::State(m) => Error::State(format!("{tag}{m}")),
            Error::Invariant(m) => Error::Invariant(format!("{tag}{m}")),
            other => other,
        }
    }

    /// Exit code the CLI should report for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invariant(_) | Error::State(_) => 3,
            _ => 2,
        }
    }
}
