use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("unknown generator family `{0}`")]
    UnknownFamily(String),

    #[error("invalid config for {family}: {reason}")]
    InvalidConfig { family: String, reason: String },

    #[error("parse error in {path}: {reason}")]
    Parse { path: String, reason: String },

    #[error("io error on {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("binarization failed: {0}")]
    Binarization(String),

    #[error("cannot split dataset: {0}")]
    Split(String),

    #[error("a single class is present; the operation needs two")]
    SingleClass,

    #[error("invalid qubit index {index} for gate {gate}")]
    InvalidQubit { gate: String, index: usize },

    #[error("gate {0} needs an angle")]
    MissingAngle(String),

    #[error("wrong parameter count for {circuit}: expected {expected}, got {got}")]
    ParamCount {
        circuit: String,
        expected: usize,
        got: usize,
    },

    #[error("feature {value} at position {index} lies outside [0, pi]")]
    FeatureOutOfDomain { index: usize, value: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("feature mode mismatch: recommender expects {expected}, got {got}")]
    ModeMismatch { expected: String, got: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown identifier `{0}`")]
    UnknownId(String),

    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
