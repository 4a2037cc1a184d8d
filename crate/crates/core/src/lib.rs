//! Bounds, exact rates and optimal linear codes for pliable index coding
//! instances described by their absent receivers.
//!
//! Instances live in [`instance`]. Lower bounds come from the decoding-chain
//! search in [`chain`] and the inclusion structure in [`structure`];
//! [`classify`] pins the exact rate for the solved families and [`codes`]
//! builds matching codes. [`oracle`] holds brute-force ground truth for small
//! instances.

pub mod chain;
pub mod classify;
pub mod codes;
pub mod field;
pub mod instance;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod set;
pub mod structure;

pub use chain::{l_star, min_skips, run_realisation, DecodingChoice, LStar, DEFAULT_BUDGET};
pub use classify::{classify, Provenance, RateResult};
pub use codes::{construct_for, verify_code, CodeMatrix, VerifyReport};
pub use field::{Exact, Field, PrimeField};
pub use instance::{Partition, PicInstance};
pub use linalg::Matrix;
pub use oracle::{crosscheck, exact_general_rate, exact_linear_rate, OracleResult};
pub use set::MessageSet;
pub use structure::{longest_nested_chain, structural_lower_bound};

/// Matrices over a prime field.
pub type GfMatrix = Matrix<PrimeField>;
/// Matrices over the rationals, for exact rank checks outside `F_q`.
pub type RationalMatrix = Matrix<Exact<num_rational::Rational64>>;
