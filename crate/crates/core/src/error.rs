use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown PRN {prn_id}; supported identifiers: {supported:?}")]
    UnknownPrn { prn_id: u32, supported: Vec<u32> },

    #[error("length mismatch: expected {expected} samples, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("sample rate mismatch: expected {expected} Hz, got {actual} Hz")]
    RateMismatch { expected: f64, actual: f64 },

    #[error("no acquisition on {channel} channel")]
    NoAcquisition { channel: &'static str },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("bad magic in IQ file: expected \"NAVIQ1\", found {found:?}")]
    BadMagic { found: Vec<u8> },

    #[error("truncated IQ file: header declares {declared} samples, payload holds {available}")]
    Truncated { declared: u64, available: u64 },

    #[error("IQ sample count mismatch: header declares {declared} samples, payload holds {actual}")]
    CountMismatch { declared: u64, actual: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
