//! Multi-backend subset-sum engine.
//!
//! The same question — which sums can a subset of the given values reach,
//! and in how many ways — is answered by several interchangeable solvers
//! that cross-validate each other:
//!
//! - [`tape`]: dense shift-and-sum tapes, exact counting or word-packed
//!   boolean reachability.
//! - [`genfunc`]: sparse polynomial expansion of `Π (1 + x^a)`, coefficient
//!   and derivative reads, and the packed-integer tape encoding.
//! - [`spectral`]: the factored complex signal `Π (1 + e^{j2π·a·t})`, its
//!   impulse spectrum, single-bin correlation reads, and the DC-integral
//!   zero-sum test.
//! - [`detector`]: a sampled, scaled, optionally noisy rendition of the
//!   signal with thresholded single-bin detection.
//! - [`polytape`]: a machine tape stored as a polynomial, plus a Turing
//!   machine runner that executes against a reference tape in lockstep.
//! - [`oracle`]: brute-force enumeration, the independent ground truth.
//! - [`harness`]: seeded corpora, cross-backend comparison, and
//!   runtime-growth measurement.

pub mod detector;
pub mod error;
pub mod genfunc;
pub mod harness;
pub mod instance;
pub mod oracle;
pub mod polytape;
pub mod spectral;
pub mod tape;

pub use error::{Error, Result};
pub use instance::{Answer, Backend, Instance, Variant};

pub use num::complex::Complex64;
pub use num::rational::Rational64;
pub use num::{BigInt, BigRational, BigUint};
