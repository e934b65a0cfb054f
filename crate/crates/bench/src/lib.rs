//! Shared fixtures for the criterion benchmarks.

use sumtape::harness;
use sumtape::instance::{Instance, Variant};

/// Mid-sized natural instance: 12 values up to 64, seeded.
pub fn mid_instance() -> Instance {
    let mut corpus = harness::seeded_corpus(0xBE, 1, &[Variant::Natural], 12, 64);
    corpus.pop().unwrap()
}

/// The family that forces a full 2^n expansion.
pub fn adversarial(n: usize) -> Instance {
    harness::adversarial_instance(n)
}

/// Wide tape: 200 values averaging 100, total near 20000.
pub fn wide_instance() -> Instance {
    let values: Vec<i64> = (0..200).map(|i| 50 + (i * 37 % 101) as i64).collect();
    let target = values.iter().sum();
    Instance::natural(values, target).unwrap()
}
