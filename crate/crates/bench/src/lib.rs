//! Shared inputs for the benchmarks.

use cyclopq::factorint::{FactorConfig, Factorizer};
use rug::ops::Pow;
use rug::Integer;

/// A factorizer with default limits and no cache.
pub fn factorizer() -> Factorizer {
    Factorizer::new(FactorConfig::default())
}

pub fn mersenne(n: u32) -> Integer {
    Integer::from(2).pow(n) - 1u32
}
