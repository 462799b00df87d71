use alloc::string::String;

use crate::HalfInt;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("invalid quantum numbers: {0}")]
    InvalidQuantumNumbers(String),
    /// A constructor's parameter bound failed; the message names the bound.
    #[error("{0}")]
    Parameter(String),
    #[error("{0}")]
    Domain(String),
    #[error("operators act on the ℓ = {found} manifold but ℓ = {expected} was expected")]
    ManifoldMismatch { expected: HalfInt, found: HalfInt },
    #[error("search space of about {estimate} configurations exceeds the cap of {cap}")]
    SearchSpaceTooLarge { estimate: u128, cap: u128 },
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = core::result::Result<T, Error>;
