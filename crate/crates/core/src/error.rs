use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid block size {0}")]
    InvalidBlockSize(usize),

    #[error("expected {expected} matrix entries, got {actual}")]
    BadEntryCount { expected: usize, actual: usize },

    #[error("non-finite value in input")]
    NonFinite,

    #[error("invalid mask: {0}")]
    InvalidMask(String),

    #[error("shift offset {offset} out of range for block size {n}")]
    OffsetOutOfRange { n: usize, offset: isize },

    #[error("mask of size {k} does not fit in a {n}x{n} block")]
    MaskTooLarge { k: usize, n: usize },

    #[error("operator set is already in the DCT domain")]
    AlreadyDct,

    #[error("operator set must be in the {0} domain")]
    WrongDomain(&'static str),

    #[error("mask rows are not mirror-symmetric")]
    NotRowSymmetric,

    #[error("operator set is already merged")]
    AlreadyMerged,

    #[error("NaN sample at ({row}, {col})")]
    NanSample { row: usize, col: usize },

    #[error("unsupported image format {0:?}")]
    UnsupportedFormat(String),

    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),

    #[error("unsupported maxval {0}, only 255 is accepted")]
    UnsupportedMaxval(u32),

    #[error("truncated pixel data: expected {expected} samples, found {found}")]
    TruncatedData { expected: usize, found: usize },

    #[error("sample value {0} exceeds maxval")]
    SampleOutOfRange(u32),

    #[error("operator dump parse error at line {line}: {msg}")]
    DumpParse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
