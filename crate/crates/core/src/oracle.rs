//! Exhaustive-enumeration ground truth.
//!
//! Walks every nonempty subset by bitmask and tallies its sum. Deliberately
//! shares nothing with the solver backends beyond the instance type, so it
//! can arbitrate between them.

use std::collections::BTreeMap;

use num::{BigInt, BigRational, BigUint, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::instance::{Answer, Backend, Instance, Variant};

/// Beyond this many values the walk stops being a quick, trustworthy check.
pub const DEFAULT_LIMIT: usize = 24;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    counts: BTreeMap<BigInt, BigUint>,
    enumerated_subsets: u64,
}

impl OracleResult {
    /// Multiplicity map over all nonempty subset sums.
    pub fn counts(&self) -> &BTreeMap<BigInt, BigUint> {
        &self.counts
    }

    /// Number of subsets walked; always `2^N - 1`.
    pub fn enumerated_subsets(&self) -> u64 {
        self.enumerated_subsets
    }

    pub fn multiplicity(&self, target: &BigInt) -> BigUint {
        self.counts.get(target).cloned().unwrap_or_default()
    }

    pub fn decision(&self, target: &BigInt) -> bool {
        self.counts.contains_key(target)
    }

    pub fn zero_sum_count(&self) -> BigUint {
        self.multiplicity(&BigInt::zero())
    }

    pub fn answer(&self, target: &BigInt) -> Answer {
        Answer::counted(Backend::Oracle, self.multiplicity(target))
    }
}

pub fn enumerate(inst: &Instance) -> Result<OracleResult> {
    enumerate_with_limit(inst, DEFAULT_LIMIT)
}

pub fn enumerate_with_limit(inst: &Instance, limit: usize) -> Result<OracleResult> {
    inst.validate()?;
    if inst.variant() == Variant::Rational {
        return Err(Error::UnsupportedVariant {
            op: "oracle enumeration",
            variant: inst.variant(),
        });
    }
    let n = inst.len();
    if n > limit {
        return Err(Error::TooLargeForOracle { n, limit });
    }

    let values = inst.int_values()?;
    let small: Option<Vec<i128>> = values.iter().map(|v| v.to_i128()).collect();

    let counts = match small {
        Some(small) => {
            let mut tally: BTreeMap<i128, u64> = BTreeMap::new();
            for mask in 1u64..(1u64 << n) {
                let mut sum: i128 = 0;
                for (i, v) in small.iter().enumerate() {
                    if (mask >> i) & 1 == 1 {
                        sum += v;
                    }
                }
                *tally.entry(sum).or_insert(0) += 1;
            }
            tally
                .into_iter()
                .map(|(s, c)| (BigInt::from(s), BigUint::from(c)))
                .collect()
        }
        // Values past i128 are rare; fall back to exact big-integer sums.
        None => {
            let mut tally: BTreeMap<BigInt, BigUint> = BTreeMap::new();
            for mask in 1u64..(1u64 << n) {
                let mut sum = BigInt::zero();
                for (i, v) in values.iter().enumerate() {
                    if (mask >> i) & 1 == 1 {
                        sum += v;
                    }
                }
                *tally.entry(sum).or_default() += 1u32;
            }
            tally
        }
    };

    Ok(OracleResult {
        counts,
        enumerated_subsets: (1u64 << n) - 1,
    })
}

/// Enumeration over exact fractions, for rational instances.
pub fn enumerate_rational(inst: &Instance) -> Result<BTreeMap<BigRational, BigUint>> {
    inst.validate()?;
    let n = inst.len();
    if n > DEFAULT_LIMIT {
        return Err(Error::TooLargeForOracle {
            n,
            limit: DEFAULT_LIMIT,
        });
    }
    let mut tally: BTreeMap<BigRational, BigUint> = BTreeMap::new();
    for mask in 1u64..(1u64 << n) {
        let mut sum = BigRational::zero();
        for (i, v) in inst.values().iter().enumerate() {
            if (mask >> i) & 1 == 1 {
                sum += v;
            }
        }
        *tally.entry(sum).or_default() += 1u32;
    }
    Ok(tally)
}
