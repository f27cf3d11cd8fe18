//! Reed-Muller codes under maximum-likelihood decoding.
//!
//! The crate builds `RM(n, r)`, classifies error patterns as coset leaders,
//! tabulates the exact error-correction capability function on small codes,
//! estimates correctable fractions by Monte Carlo on large first-order codes,
//! and evaluates the closed-form threshold and tail bounds that describe where
//! almost-all-correctable turns into almost-all-uncorrectable.
//!
//! Heavy loops (coset enumeration, codeword enumeration, Monte Carlo trials)
//! run on rayon when the `parallel` feature is enabled. Every parallel routine
//! takes a [`Workers`] value and produces identical results for any worker
//! count, including [`Workers::Serial`].

pub mod bounds;
pub mod capability;
pub mod cli;
pub mod error;
pub mod gf2;
pub mod montecarlo;
pub mod par;
pub mod rmcode;

pub use capability::{CapabilityProfile, ErrorClass};
pub use error::{Error, Result};
pub use gf2::{WalshSpectrum, Word};
pub use montecarlo::McEstimate;
pub use par::Workers;
pub use rmcode::RmCode;
pub use bounds::ThresholdParams;
