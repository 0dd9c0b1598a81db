use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid deck: n = {n}, m = {m} (both must be at least 1)")]
    InvalidSpec { n: u64, m: u64 },

    #[error("deck of {n} x {m} cards exceeds the supported size of 2^40")]
    DeckTooLarge { n: u64, m: u64 },

    #[error("the deck is empty")]
    EmptyDeck,

    #[error("{what} = {value} is outside [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: u64,
        lo: u64,
        hi: u64,
    },

    #[error("{what} needs {required} but the configured cap is {cap}")]
    Capacity {
        what: &'static str,
        required: u128,
        cap: u128,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    pub fn is_capacity(&self) -> bool {
        matches!(self, Error::Capacity { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
