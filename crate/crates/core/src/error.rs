use thiserror::Error;

/// Errors raised by the arithmetic, L-function and enumeration layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("factorization budget exceeded for {0}")]
    FactorizationBudget(u64),

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("pole at {0}")]
    Pole(String),

    #[error("bound {bound} exceeds the {what} limit {limit}")]
    BoundTooLarge {
        what: &'static str,
        bound: u128,
        limit: u128,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
