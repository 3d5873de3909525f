use thiserror::Error;

use crate::bitstream::Encoding;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("bitstream length must be at least 1")]
    EmptyStream,

    #[error("stream lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("expected {expected:?} encoding, found {found:?}")]
    EncodingMismatch { expected: Encoding, found: Encoding },

    #[error("streams are not in the same correlation group")]
    CorrelationMismatch,

    #[error("width {0} is outside the supported range {1}..={2}")]
    WidthOutOfRange(u32, u32, u32),

    #[error("invalid LFSR: {0}")]
    InvalidLfsr(String),

    #[error("permutation is not a bijection on 0..{0}")]
    InvalidPermutation(u32),

    #[error("source provides {have}-bit words, {need} bits required")]
    SourceTooNarrow { have: u32, need: u32 },

    #[error("input word {x} out of range for {bits}-bit precision")]
    WordOutOfRange { x: u64, bits: u32 },

    #[error("expected {expected} inputs, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("count {count} exceeds maximum {max}")]
    CountOutOfRange { count: u64, max: u64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid model: {0}")]
    Model(String),

    #[error("invalid dataset: {0}")]
    Dataset(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("missing profile entry `{0}`")]
    MissingProfileEntry(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
