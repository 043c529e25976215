//! Computational toolkit for the equation (x^ℓ − 1)/(x − 1) = p^m·q.

pub mod arith;
pub mod certifier;
pub mod cyclotomic;
pub mod error;
pub mod factorint;
pub mod interval;
pub mod json;
pub mod linforms;
pub mod quadfield;

pub use certifier::{
    certify, certify_large, certify_small, gap_chain, opn_bound, CertificateReport, CertifyOptions, GapChain, InvariantMode, LowerConstant,
    OpnBound, Verdict,
};
pub use cyclotomic::{eval_phi, gauss_pair, has_primitive_prime_factor, represent_phi, CycloValue, GaussPair, Representation};
pub use error::{Error, Result};
pub use factorint::{
    classify_phi_shape, escalation_check, is_probable_prime, search_solutions, Certainty, FactorCache, FactorConfig, FactorizationResult,
    Factorizer, Primality, SearchOutcome, Shape, SolutionRecord,
};
pub use interval::{Interval, DEFAULT_PRECISION, MIN_PRECISION};
pub use linforms::{m_upper_bound, matveev_constant, matveev_lower_bound, resolve_superlog, BoundReport, Case, LinearFormInstance};
pub use quadfield::{build_field, split_prime, QuadElement, QuadraticField};
