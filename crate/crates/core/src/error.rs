use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("empty signal")]
    EmptySignal,

    #[error("invalid signal: {0}")]
    InvalidSignal(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{what} at {frequency_hz} Hz violates the Nyquist limit of {nyquist_hz} Hz")]
    Nyquist {
        what: &'static str,
        frequency_hz: f64,
        nyquist_hz: f64,
    },

    #[error("frame length {frame_length} exceeds signal length {signal_length}")]
    FrameTooLong {
        frame_length: usize,
        signal_length: usize,
    },

    #[error("frame length must be positive")]
    ZeroFrameLength,

    #[error("scale must be positive and finite, got {0}")]
    InvalidScale(f64),

    #[error("translation {translation} outside [0, {length})")]
    TranslationOutOfRange { translation: f64, length: usize },

    #[error("objective returned {value} at position {position}")]
    NonFiniteFitness { position: f64, value: f64 },

    #[error("scale {scale} outside histogram range [{lower}, {upper}]")]
    ScaleOutOfRange { scale: f64, lower: f64, upper: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("training data must contain both classes")]
    SingleClass,

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("SVM solver did not converge after {iterations} iterations (KKT residual {kkt_residual:.3e})")]
    NotConverged { iterations: usize, kkt_residual: f64 },

    #[error("split {train} + {test} exceeds the {available} available rows")]
    SplitTooLarge {
        train: usize,
        test: usize,
        available: usize,
    },

    #[error("{0}")]
    Format(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
