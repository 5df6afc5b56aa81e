use num::BigUint;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("prime {p} rejected: {context} requires p >= {min}")]
    PrimeTooSmall {
        p: u64,
        min: u64,
        context: &'static str,
    },

    #[error("capacity exceeded: {what} needs index {needed}, cap is {cap}")]
    Capacity { what: String, needed: u64, cap: u64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("exact-mode bound exceeded: n = {n} > {bound}; use harmonic_mod_pk")]
    ExactBoundExceeded { n: BigUint, bound: u64 },

    #[error("precision exhausted: result is zero to precision, valuation >= {bound}")]
    PrecisionExhausted { bound: i64 },

    #[error("undetermined at precision ceiling {ceiling}: only valuation >= {bound} is known")]
    Undetermined { bound: i64, ceiling: u32 },

    #[error("enumeration status is {status}, not Complete")]
    NotComplete { status: String },
}

pub type Result<T> = std::result::Result<T, Error>;
