use alloc::string::String;

/// Errors raised by the kernel and learning primitives.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A parameter is outside its domain (p = 0, mismatched dimensions, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// The input data violates a contract (missing channel, duplicate id, ...).
    #[error("data error: {0}")]
    Data(String),
    /// A linear-algebra routine could not produce a trustworthy result.
    #[error("numeric error: {message} (condition estimate {condition:e})")]
    Numeric { message: String, condition: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::error::Error::InvalidParameter(alloc::format!($($arg)*))
    };
}

macro_rules! data_err {
    ($($arg:tt)*) => {
        $crate::error::Error::Data(alloc::format!($($arg)*))
    };
}

pub(crate) use data_err;
pub(crate) use invalid;
