//! Primality, factorization, the factorization cache and solution search.

mod cache;
mod factor;
mod prime;
mod search;

pub use cache::{format_record, parse_record, FactorCache};
pub use factor::{perfect_power, BudgetCounters, Certainty, FactorConfig, FactorizationResult, Factorizer};
pub use prime::{
    deterministic_limit, is_prime_u64, is_probable_prime, next_prime_u64, primes_up_to, strong_lucas_probable_prime, strong_probable_prime,
    Primality,
};
pub use search::{
    classify_phi_shape, dependent_structure, escalation_check, matches_pq, search_solutions, Dependence, EscalationReport, LemmaCheck,
    SearchOutcome, Shape, SolutionRecord,
};
