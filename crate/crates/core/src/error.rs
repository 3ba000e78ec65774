use thiserror::Error;

/// Failures reported by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid waveform: {0}")]
    InvalidWaveform(String),
    #[error("window too short: {0}")]
    WindowTooShort(String),
    #[error("phase-encoding patterns have no analytic reference or designed response")]
    UnsupportedReference,
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("cannot normalize an all-zero waveform")]
    ZeroWaveform,
    #[error("invalid value for `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },
    #[error("window overflow: {0}")]
    WindowOverflow(String),
    #[error("non-finite value produced in {0}")]
    NonFinite(String),
    #[error("channel {index} out of range for a {count}-tap processor")]
    ChannelOutOfRange { index: usize, count: usize },
    #[error("channel {0} measured zero response for a nonzero target weight")]
    DeadChannel(usize),
    #[error("unknown sweep parameter `{0}`")]
    UnknownParameter(String),
    #[error("output error: {0}")]
    Output(String),
}

impl Error {
    pub(crate) fn param(field: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { field: field.to_string(), reason: reason.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
