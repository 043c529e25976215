use rug::Integer;
use thiserror::Error;

use crate::factorint::FactorizationResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(Integer),

    #[error("l = {ell} is below the supported range (need l >= {min})")]
    BelowRange { ell: u64, min: u64 },

    #[error("no integer representation X^2 - D*Y^2 = Phi_{ell}({x}) within the unit scan: {reason}")]
    NoIntegerRepresentation { ell: u64, x: Integer, reason: String },

    #[error("factorization budget exhausted; {} composite cofactor(s) left", partial.composite_cofactors.len())]
    FactorizationBudgetExceeded { partial: Box<FactorizationResult> },

    #[error("prime {p} does not split in Q(sqrt({d}))")]
    NonSplitPrime { p: Integer, d: i64 },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("U = {0} is below 3.6e10, where the 0.569 U log U resolution is not certified")]
    DomainTooSmall(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("could not certify at the working precision: {0}")]
    Undecided(String),

    #[error("factor cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::FactorizationBudgetExceeded { .. })
    }
}
