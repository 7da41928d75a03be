use alloc::boxed::Box;
use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("bad parameters: {0}")]
    Parameters(String),
    #[error("point lies outside the partition window")]
    OutOfRange,
    #[error("set has zero volume; use distance-based membership")]
    ZeroVolume,
    #[error("too few samples: got {got}, need {need}")]
    TooFewSamples { got: usize, need: usize },
    #[error("point {index}: {source}")]
    AtPoint { index: usize, source: Box<Error> },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub(crate) fn at(self, index: usize) -> Self {
        Error::AtPoint {
            index,
            source: Box::new(self),
        }
    }
}
