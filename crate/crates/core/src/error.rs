use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        // Bound first so NaN comparisons fail the guard.
        let ok: bool = $cond;
        if !ok {
            return Err($crate::Error::InvalidArgument(format!($($fmt)+)));
        }
    };
}
pub(crate) use ensure;
