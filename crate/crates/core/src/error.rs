use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point {value} lies outside the kernel interval [{a}, {b}]")]
    OutsideDomain { value: f64, a: f64, b: f64 },

    #[error("nodes {first} and {second} coincide (distance {distance:e})")]
    DuplicateNodes { first: usize, second: usize, distance: f64 },

    #[error("{quantity} needs at least {required} points, got {got}")]
    TooFewPoints {
        quantity: &'static str,
        required: usize,
        got: usize,
    },

    #[error("matrix not positive definite after jitter {jitter:e}: pivot {pivot} = {value:e}")]
    NotPositiveDefinite { pivot: usize, value: f64, jitter: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("decay fit needs at least {required} usable points, got {got}")]
    InsufficientFitData { required: usize, got: usize },

    #[error("level n = {level}: {source}")]
    AtLevel {
        level: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn at_level(self, level: usize) -> Self {
        Error::AtLevel {
            level,
            source: Box::new(self),
        }
    }
}
