use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mask has no foreground pixels")]
    EmptyMask,

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimMismatch {
        what: &'static str,
        expected: String,
        got: String,
    },

    #[error("non-finite value at flat index {index}")]
    NonFinite { index: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("spatial weighting factor must be positive, got {0}")]
    NonPositiveFactor(f64),

    #[error("requested {requested} seeds but mask only has {available} foreground pixels")]
    InsufficientForeground { requested: usize, available: usize },

    #[error("seed ({row}, {col}) is not a foreground pixel")]
    SeedOutsideMask { row: usize, col: usize },

    #[error("prototype set is empty")]
    EmptyPrototypeSet,

    #[error("guide index {index} out of range for {count} prototypes")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("projection expects {expected} input channels, merged feature has {got}")]
    ProjectionShapeMismatch { expected: usize, got: usize },

    #[error("empty list of prototype sets")]
    EmptyList,

    #[error("bad magic bytes {0:?}")]
    BadMagic([u8; 4]),

    #[error("unsupported tensor file version {0}")]
    UnsupportedVersion(u8),

    #[error("unsupported dtype code {0}")]
    UnsupportedDtype(u8),

    #[error("unsupported rank {0}")]
    UnsupportedRank(u8),

    #[error("truncated payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },

    #[error("tensor shape {0:?} overflows addressable size")]
    ShapeOverflow(Vec<u64>),

    #[error("expected {expected} tensor, found {found}")]
    WrongKind {
        expected: &'static str,
        found: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn dims(what: &'static str, expected: impl ToString, got: impl ToString) -> Self {
        Error::DimMismatch {
            what,
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }

    /// Whether the error comes from reading or writing files rather than from
    /// shape or value validation.
    pub fn is_io(&self) -> bool {
        matches!(
            self,
            Error::Io(_)
                | Error::BadMagic(_)
                | Error::UnsupportedVersion(_)
                | Error::UnsupportedDtype(_)
                | Error::UnsupportedRank(_)
                | Error::TruncatedPayload { .. }
                | Error::ShapeOverflow(_)
        )
    }
}
