use alloc::string::String;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("neighborhood size k = {k} exceeds the number of points {n}")]
    KTooLarge { k: usize, n: usize },
    #[error("need at least {required} points, got {got}")]
    TooFewPoints { required: usize, got: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("labelings have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("unknown cluster id {0}")]
    UnknownCluster(usize),
    #[error("malformed cluster tree: {0}")]
    MalformedTree(String),
    #[error("trajectory {object_id}: {reason}")]
    InvalidTrajectory { object_id: String, reason: String },
    #[error("scene has no buildings or junctions")]
    EmptyScene,
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
