//! Dense-tape subset-sum solvers.
//!
//! Cell `j` of a tape records how many nonempty subsets (or, in the boolean
//! form, whether any nonempty subset) of the processed values sum to `j`.
//! Each value `a` folds into the tape as "shift the tape right by `a`, mark
//! the singleton at `a`, add element-wise", realized in place with a
//! descending index walk so one `S + 1`-cell allocation serves the whole run.

use num::{BigInt, BigUint, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::instance::{Answer, Backend, Instance, Variant};

/// Exact multiplicity tape over sums `0..=S`, `S` = sum of all values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountTape {
    counts: Vec<BigUint>,
}

/// Word-packed reachability tape over the same index range.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoolTape {
    words: Vec<u64>,
    len: usize,
}

fn natural_cells(inst: &Instance) -> Result<(Vec<usize>, usize)> {
    inst.validate()?;
    if inst.variant() != Variant::Natural {
        return Err(Error::UnsupportedVariant {
            op: "tape solver",
            variant: inst.variant(),
        });
    }
    let ints = inst.int_values()?;
    let total: BigInt = ints.iter().sum();
    let total = total
        .to_usize()
        .ok_or_else(|| Error::TapeTooLarge(total.clone()))?;
    let values = ints
        .iter()
        .map(|v| v.to_usize().expect("value bounded by total"))
        .collect();
    Ok((values, total))
}

/// Runs the counting tape over a natural instance.
pub fn run_count(inst: &Instance) -> Result<CountTape> {
    let (values, total) = natural_cells(inst)?;
    let mut counts = vec![BigUint::zero(); total + 1];
    // Sums stay bounded by the running prefix total, so the descending walk
    // below never writes past `reach + a`.
    let mut reach = 0usize;
    for &a in &values {
        for j in (a..=reach + a).rev() {
            let (lo, hi) = counts.split_at_mut(j);
            if !lo[j - a].is_zero() {
                hi[0] += &lo[j - a];
            }
        }
        counts[a] += 1u32;
        reach += a;
    }
    Ok(CountTape { counts })
}

/// Runs the boolean tape, one machine word of cells per shift-or step.
pub fn run_bool(inst: &Instance) -> Result<BoolTape> {
    let (values, total) = natural_cells(inst)?;
    let len = total + 1;
    let mut words = vec![0u64; len.div_ceil(64)];
    for &a in &values {
        shift_or(&mut words, a);
        words[a / 64] |= 1 << (a % 64);
    }
    Ok(BoolTape { words, len })
}

/// `bits |= bits << a`, walking words downward so the unshifted source is
/// still intact when read.
fn shift_or(words: &mut [u64], a: usize) {
    let word_shift = a / 64;
    let bit_shift = a % 64;
    if bit_shift == 0 {
        for i in (word_shift..words.len()).rev() {
            words[i] |= words[i - word_shift];
        }
    } else {
        for i in (word_shift..words.len()).rev() {
            let lo = words[i - word_shift] << bit_shift;
            let carry = if i > word_shift {
                words[i - word_shift - 1] >> (64 - bit_shift)
            } else {
                0
            };
            words[i] |= lo | carry;
        }
    }
}

impl CountTape {
    /// Largest addressable sum (the total of all instance values).
    pub fn total(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn count(&self, j: usize) -> BigUint {
        self.counts.get(j).cloned().unwrap_or_default()
    }

    /// Cells with nonzero multiplicity, in ascending sum order.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, &BigUint)> {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
    }

    pub fn decide(&self, target: &BigInt) -> Answer {
        let mult = match target.to_usize() {
            Some(j) if j < self.counts.len() => self.counts[j].clone(),
            _ => BigUint::zero(),
        };
        Answer::counted(Backend::TapeCount, mult)
    }
}

impl BoolTape {
    pub fn total(&self) -> usize {
        self.len - 1
    }

    pub fn get(&self, j: usize) -> bool {
        j < self.len && (self.words[j / 64] >> (j % 64)) & 1 == 1
    }

    pub fn ones(&self) -> Vec<usize> {
        (0..self.len).filter(|&j| self.get(j)).collect()
    }

    /// Boolean read: a clear bit pins the multiplicity to zero, a set bit
    /// only proves it is positive.
    pub fn decide(&self, target: &BigInt) -> Answer {
        let reachable = target.to_usize().map(|j| self.get(j)).unwrap_or(false);
        if reachable {
            Answer::decided(Backend::TapeBool, true)
        } else {
            Answer {
                decision: false,
                multiplicity: Some(BigUint::zero()),
                backend: Backend::TapeBool,
            }
        }
    }
}

/// True when the boolean tape is exactly the positivity mask of the counts.
pub fn bool_matches_count(bools: &BoolTape, counts: &CountTape) -> bool {
    bools.len == counts.counts.len()
        && (0..bools.len).all(|j| bools.get(j) == !counts.counts[j].is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use num::One;
    use proptest::prelude::*;

    fn nat(values: Vec<i64>) -> Instance {
        let target = values.iter().sum();
        Instance::natural(values, target).unwrap()
    }

    fn count_map(tape: &CountTape) -> Vec<(usize, u64)> {
        tape.nonzero()
            .map(|(j, c)| (j, c.to_u64().unwrap()))
            .collect()
    }

    #[test]
    fn three_value_tape() {
        let tape = run_count(&nat(vec![3, 4, 1])).unwrap();
        assert_eq!(
            count_map(&tape),
            vec![(1, 1), (3, 1), (4, 2), (5, 1), (7, 1), (8, 1)]
        );
    }

    #[test]
    fn single_value_tape() {
        let tape = run_count(&nat(vec![5])).unwrap();
        assert_eq!(count_map(&tape), vec![(5, 1)]);
    }

    #[test]
    fn repeated_values_accumulate() {
        let tape = run_count(&nat(vec![1, 1, 1])).unwrap();
        assert_eq!(count_map(&tape), vec![(1, 3), (2, 3), (3, 1)]);
    }

    #[test]
    fn bool_tape_matches_fig_pattern() {
        let tape = run_bool(&nat(vec![3, 4, 1])).unwrap();
        assert_eq!(tape.ones(), vec![1, 3, 4, 5, 7, 8]);
    }

    #[test]
    fn bool_tape_collapses_duplicates() {
        let tape = run_bool(&nat(vec![2, 2])).unwrap();
        assert_eq!(tape.ones(), vec![2, 4]);
    }

    #[test]
    fn bool_tape_single() {
        let tape = run_bool(&nat(vec![1])).unwrap();
        assert_eq!(tape.ones(), vec![1]);
    }

    #[test]
    fn decide_reads_cells() {
        let tape = run_count(&nat(vec![3, 4, 1])).unwrap();
        let miss = tape.decide(&BigInt::from(9));
        assert!(!miss.decision);
        assert_eq!(miss.multiplicity, Some(BigUint::zero()));

        let hit = tape.decide(&BigInt::from(8));
        assert!(hit.decision);
        assert_eq!(hit.multiplicity, Some(BigUint::one()));

        let zero = tape.decide(&BigInt::zero());
        assert!(!zero.decision);
        assert_eq!(zero.multiplicity, Some(BigUint::zero()));

        let negative = tape.decide(&BigInt::from(-3));
        assert!(!negative.decision);
    }

    #[test]
    fn bool_decide_reports_zero_only_when_known() {
        let tape = run_bool(&nat(vec![3, 4, 1])).unwrap();
        let hit = tape.decide(&BigInt::from(4));
        assert!(hit.decision);
        assert!(hit.multiplicity.is_none());
        let miss = tape.decide(&BigInt::from(2));
        assert_eq!(miss.multiplicity, Some(BigUint::zero()));
    }

    #[test]
    fn rejects_non_natural_variants() {
        let inst = Instance::integer(vec![2, -2], 0).unwrap();
        assert!(matches!(
            run_count(&inst),
            Err(Error::UnsupportedVariant { .. })
        ));
    }

    #[test]
    fn intermediate_steps_count_prefix_subsets() {
        // After processing i values the tape must describe exactly the
        // prefix instance of those i values.
        let values = [4usize, 2, 7, 2, 5];
        for i in 1..=values.len() {
            let prefix: Vec<i64> = values[..i].iter().map(|&v| v as i64).collect();
            let tape = run_count(&nat(prefix.clone())).unwrap();
            let truth = oracle::enumerate(&nat(prefix)).unwrap();
            for (j, c) in tape.nonzero() {
                assert_eq!(truth.multiplicity(&BigInt::from(j)), c.clone());
            }
        }
    }

    proptest! {
        #[test]
        fn counts_conserve_subsets(values in proptest::collection::vec(1i64..48, 1..10)) {
            let n = values.len() as u32;
            let tape = run_count(&nat(values)).unwrap();
            prop_assert!(tape.count(0).is_zero());
            let total: BigUint = tape.counts.iter().sum();
            prop_assert_eq!(total, (BigUint::one() << n) - BigUint::one());
        }

        #[test]
        fn bool_equals_count_positivity(values in proptest::collection::vec(1i64..96, 1..12)) {
            let inst = nat(values);
            let counts = run_count(&inst).unwrap();
            let bools = run_bool(&inst).unwrap();
            prop_assert!(bool_matches_count(&bools, &counts));
        }

        #[test]
        fn counts_match_enumeration(values in proptest::collection::vec(1i64..40, 1..11)) {
            let inst = nat(values);
            let tape = run_count(&inst).unwrap();
            let truth = oracle::enumerate(&inst).unwrap();
            for (j, c) in tape.nonzero() {
                prop_assert_eq!(truth.multiplicity(&BigInt::from(j)), c.clone());
            }
            let nonzero_cells = tape.nonzero().count();
            prop_assert_eq!(nonzero_cells, truth.counts().len());
        }
    }
}
