use std::path::PathBuf;

/// Errors produced by the library.
///
/// The taxonomy follows the operation contracts: configuration problems
/// (dataset layout, missing weights), argument violations (bad shapes,
/// out-of-range values), and I/O or format failures on artifacts.
#[derive(Debug, thiserror::Error)]
pub enum CoreError {
    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot decode image {path}: {reason}")]
    ImageDecode { path: PathBuf, reason: String },

    /// Dataset layout, empty splits, missing class weights, and similar
    /// problems with how a run is set up.
    #[error("configuration error: {0}")]
    Config(String),

    /// A caller-supplied value violates an operation precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: String, actual: String },

    /// Pretrained weights were requested but are not present locally.
    #[error(
        "pretrained weights for `{architecture}` not found at {path}; \
         place a weight container there (see README, \"Pretrained weights\") \
         or build with pretrained = false"
    )]
    WeightsUnavailable { architecture: String, path: PathBuf },

    /// A manifest, checkpoint, config, or report file failed to parse.
    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("dataset hash mismatch: report aggregation requires identical datasets ({left} vs {right})")]
    DatasetHashMismatch { left: String, right: String },
}

pub type Result<T> = std::result::Result<T, CoreError>;

impl CoreError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CoreError::Io { path: path.into(), source }
    }

    pub fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        CoreError::Format { path: path.into(), reason: reason.into() }
    }
}
