use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report.
///
/// [`Error::code`] gives a stable machine-readable name for each variant and
/// [`Error::is_degenerate`] separates bad data from bad input.
#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("bad magic bytes {0:?}, expected \"IPMX\"")]
    BadMagic([u8; 4]),
    #[error("unsupported IPMX version {0}")]
    UnsupportedVersion(u8),
    #[error("unsupported IPMX dtype byte {0}")]
    UnsupportedDtype(u8),
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Truncated { expected: u64, found: u64 },
    #[error("{0} unexpected bytes after payload")]
    TrailingData(u64),
    #[error("invalid matrix shape {rows}x{cols} for {len} values")]
    InvalidShape { rows: usize, cols: usize, len: usize },
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("missing or wrong CSV header: expected {expected}, found {found:?}")]
    MissingHeader { expected: String, found: String },
    #[error("malformed CSV at line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("label {value:?} at line {line} is not an integer")]
    NonIntegerLabel { line: u64, value: String },
    #[error("label {value} at line {line} is negative")]
    NegativeLabel { line: u64, value: i64 },
    #[error("duplicate index {0}")]
    DuplicateIndex(u64),
    #[error("field {field} must be positive (line {line})")]
    NonPositiveField { field: &'static str, line: u64 },
    #[error("label count {labels} does not match row count {rows}")]
    LabelCountMismatch { labels: usize, rows: usize },

    #[error("unsupported PNM variant {0:?}")]
    UnsupportedVariant(String),
    #[error("unsupported PNM maxval {0}, only 255 is accepted")]
    UnsupportedMaxval(u32),
    #[error("malformed PNM header: {0}")]
    MalformedImage(String),
    #[error("image dimensions {expected} do not match row length {found}")]
    ImageSizeMismatch { expected: usize, found: usize },
    #[error("target size {height}x{width} must be positive")]
    InvalidTarget { height: usize, width: usize },

    #[error("k = {k} out of range for {rows} rows (need 1 <= k <= rows - 1)")]
    KOutOfRange { k: usize, rows: usize },
    #[error("too few points: need at least {needed}, have {found}")]
    TooFewPoints { needed: usize, found: usize },
    #[error("degenerate point cloud: {0}")]
    DegenerateCloud(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("labels must contain exactly two classes for this estimate, found {0}")]
    NotBinary(usize),

    #[error("no records to fit")]
    EmptyRecords,
    #[error("record {0} has no d_repr")]
    MissingDRepr(usize),
    #[error("fits cover different record counts ({a} vs {b})")]
    MismatchedRecords { a: usize, b: usize },
    #[error("length mismatch ({a} vs {b})")]
    LengthMismatch { a: usize, b: usize },
    #[error("zero variance in input")]
    DegenerateVariance,
    #[error("lipschitz constant must be positive, got {0}")]
    NonPositiveLipschitz(f64),
    #[error("margin must be nonnegative, got {0}")]
    NegativeMargin(f64),
    #[error("k_f of task {0:?} must be positive")]
    NonPositiveKf(String),

    #[error("invalid manifold spec: {0}")]
    InvalidSpec(String),
    #[error("labeling removed every point of at least one class")]
    AllRemoved,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::FileNotFound(path)
        } else {
            Error::Io { path, source }
        }
    }

    /// Stable machine-readable name of the error.
    pub fn code(&self) -> &'static str {
        match self {
            Error::FileNotFound(_) => "FileNotFound",
            Error::Io { .. } => "Io",
            Error::BadMagic(_) => "BadMagic",
            Error::UnsupportedVersion(_) => "UnsupportedVersion",
            Error::UnsupportedDtype(_) => "UnsupportedDtype",
            Error::Truncated { .. } => "Truncated",
            Error::TrailingData(_) => "TrailingData",
            Error::InvalidShape { .. } => "InvalidShape",
            Error::NonFinite { .. } => "NonFinite",
            Error::MissingHeader { .. } => "MissingHeader",
            Error::Csv { .. } => "Csv",
            Error::NonIntegerLabel { .. } => "NonIntegerLabel",
            Error::NegativeLabel { .. } => "NegativeLabel",
            Error::DuplicateIndex(_) => "DuplicateIndex",
            Error::NonPositiveField { .. } => "NonPositiveField",
            Error::LabelCountMismatch { .. } => "LabelCountMismatch",
            Error::UnsupportedVariant(_) => "UnsupportedVariant",
            Error::UnsupportedMaxval(_) => "UnsupportedMaxval",
            Error::MalformedImage(_) => "MalformedImage",
            Error::ImageSizeMismatch { .. } => "ImageSizeMismatch",
            Error::InvalidTarget { .. } => "InvalidTarget",
            Error::KOutOfRange { .. } => "KOutOfRange",
            Error::TooFewPoints { .. } => "TooFewPoints",
            Error::DegenerateCloud(_) => "DegenerateCloud",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::NotBinary(_) => "NotBinary",
            Error::EmptyRecords => "EmptyRecords",
            Error::MissingDRepr(_) => "MissingDRepr",
            Error::MismatchedRecords { .. } => "MismatchedRecords",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::DegenerateVariance => "DegenerateVariance",
            Error::NonPositiveLipschitz(_) => "NonPositiveLipschitz",
            Error::NegativeMargin(_) => "NegativeMargin",
            Error::NonPositiveKf(_) => "NonPositiveKf",
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::AllRemoved => "AllRemoved",
        }
    }

    /// True when the input was well-formed but the data cannot support the
    /// requested estimate.
    pub fn is_degenerate(&self) -> bool {
        matches!(self, Error::DegenerateCloud(_) | Error::DegenerateVariance | Error::AllRemoved)
    }
}
