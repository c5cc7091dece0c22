use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("series has no valid samples")]
    EmptySeries,
    #[error("timestamps cannot be ordered: {0}")]
    NonMonotonic(String),
    #[error("timestamps and values differ in length ({timestamps} vs {values})")]
    LengthMismatch { timestamps: usize, values: usize },
    #[error("series span {span_s}s is shorter than the {required_s}s required")]
    SpanTooShort { span_s: f64, required_s: f64 },
    #[error("invalid window spec: {0}")]
    InvalidSpec(String),
    #[error("input is empty")]
    EmptyInput,
    #[error("window is not evenly sampled (max gap deviation {deviation:.4} of median)")]
    UnevenSampling { deviation: f64 },
    #[error("need at least {required} samples, got {got}")]
    TooFewSamples { required: usize, got: usize },
    #[error("frequency must be positive, got {0}")]
    NonPositiveFrequency(f64),
    #[error("spectrum has no frequencies")]
    EmptySpectrum,
    #[error("trace is empty")]
    EmptyTrace,
    #[error("invalid range: {0}")]
    InvalidRange(String),
    #[error("series do not share a sample grid")]
    GridMismatch,
    #[error("invalid filter cutoffs: {0}")]
    InvalidCutoffs(String),
    #[error("series sampling does not match filter rate {rate_hz} Hz")]
    RateMismatch { rate_hz: f64 },
    #[error("traces use different strides")]
    StrideMismatch,
    #[error("no grid points remain between start and end")]
    EmptyIntersection,
    #[error("need at least {required} subjects, got {got}")]
    TooFewSubjects { required: usize, got: usize },
    #[error("invalid band width: {0}")]
    InvalidBandWidth(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: missing column `{column}`")]
    MissingColumn { line: usize, column: &'static str },
    #[error("need at least {required} rows, got {got}")]
    TooFewRows { required: usize, got: usize },
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    /// Stable identifier for machine-readable diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptySeries => "EmptySeries",
            Error::NonMonotonic(_) => "NonMonotonic",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::SpanTooShort { .. } => "SpanTooShort",
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::EmptyInput => "EmptyInput",
            Error::UnevenSampling { .. } => "UnevenSampling",
            Error::TooFewSamples { .. } => "TooFewSamples",
            Error::NonPositiveFrequency(_) => "NonPositiveFrequency",
            Error::EmptySpectrum => "EmptySpectrum",
            Error::EmptyTrace => "EmptyTrace",
            Error::InvalidRange(_) => "InvalidRange",
            Error::GridMismatch => "GridMismatch",
            Error::InvalidCutoffs(_) => "InvalidCutoffs",
            Error::RateMismatch { .. } => "RateMismatch",
            Error::StrideMismatch => "StrideMismatch",
            Error::EmptyIntersection => "EmptyIntersection",
            Error::TooFewSubjects { .. } => "TooFewSubjects",
            Error::InvalidBandWidth(_) => "InvalidBandWidth",
            Error::Parse { .. } => "ParseError",
            Error::MissingColumn { .. } => "MissingColumn",
            Error::TooFewRows { .. } => "TooFewRows",
            Error::Config(_) => "ConfigError",
            Error::Io { .. } => "IoError",
        }
    }

    pub(crate) fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}
