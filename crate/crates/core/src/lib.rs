//! Exact p-adic analysis of harmonic numbers H(n) = 1 + 1/2 + … + 1/n.
//!
//! Everything here is certified arithmetic: valuations come out exact, with
//! explicit precision bookkeeping for the rare configurations where only a
//! lower bound can be certified.
//!
//! * [`padic`] - bounded-precision p-adic numbers ([`PadicApprox`]) with
//!   ultrametric-aware arithmetic, and exact valuations of rationals.
//! * [`bernoulli`] - exact Bernoulli numbers with von Staudt denominator
//!   verification, valuation certificates, and Kummer index reduction.
//! * [`harmonic`] - exact streaming H(n) for moderate n, and a digit-lifting
//!   evaluator ([`harmonic_mod_pk`]) that reaches n with hundreds of digits
//!   by recursing on the base-p representation; expansion of H(p^m·n) into
//!   its Bernoulli correction tail.
//! * [`jp`] - the sets J_p = {n : ν_p(H(n)) ≥ 1} by exact scan or by
//!   breadth-first digit lifting with a completeness certificate.
//! * [`wolstenholme`] - Wolstenholme primality (harmonic and Bernoulli
//!   criteria, cross-checked), range scans, valuation towers ν_p(H(p^m·n))
//!   with pattern classification, and exact valuation tables.
//! * [`verify`] - the property suites backing the `verify` CLI command.

pub mod bernoulli;
pub mod error;
pub mod harmonic;
pub mod jp;
pub mod modular;
pub mod padic;
pub mod primes;
mod ser;
pub mod verify;
pub mod wolstenholme;

pub use error::{Error, Result};
pub use harmonic::{
    harmonic_exact, harmonic_mod_pk, nu_p_harmonic, valuation_stream, DigitsBaseP,
};
pub use jp::{certify_harmonic_prime, jp_enumerate, jp_scan_exact, JpResult, JpStatus};
pub use padic::{approx_from_rational, val_rational, PadicApprox, Rational, Valuation};
pub use wolstenholme::{
    classify_tower, table_generate, wolstenholme_scan, wolstenholme_test, PatternReport,
    TowerClass, ValuationTable, WolstenholmeResult,
};
