//! Sparse-polynomial backend.
//!
//! A subset-sum instance expands into the product of one `1 + x^a` factor per
//! value. After expansion the coefficient at `x^b` is the number of nonempty
//! subsets summing to `b`, plus a constant term of 1 contributed by the empty
//! subset. Expansion is worst-case exponential in the number of values, so it
//! runs under an explicit term cap.

use std::collections::BTreeMap;

use num::{BigInt, BigUint, One, Signed, ToPrimitive, Zero};
use serde_json::{Map as JsonMap, Value as JsonValue};

use crate::error::{Error, Result};
use crate::instance::{Instance, Variant};

/// Hard ceiling on stored terms during expansion.
pub const DEFAULT_TERM_CAP: usize = 1 << 22;

/// Exact polynomial keyed by exponent. Exponents may be negative; stored
/// coefficients are never zero.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SparsePoly {
    terms: BTreeMap<BigInt, BigInt>,
}

/// A reachability tape packed into one big integer: bit `j` is set when some
/// nonempty subset sums to `j`. Bit 0 is always clear.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TapeInteger(BigUint);

impl TapeInteger {
    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn bit(&self, j: u64) -> bool {
        self.0.bit(j)
    }
}

impl SparsePoly {
    pub fn zero() -> Self {
        SparsePoly::default()
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        let mut p = SparsePoly::default();
        p.add_term(BigInt::zero(), c.into());
        p
    }

    pub fn monomial(exponent: impl Into<BigInt>, coefficient: impl Into<BigInt>) -> Self {
        let mut p = SparsePoly::default();
        p.add_term(exponent.into(), coefficient.into());
        p
    }

    pub fn from_terms<E, C>(terms: impl IntoIterator<Item = (E, C)>) -> Self
    where
        E: Into<BigInt>,
        C: Into<BigInt>,
    {
        let mut p = SparsePoly::default();
        for (e, c) in terms {
            p.add_term(e.into(), c.into());
        }
        p
    }

    /// Adds `coefficient * x^exponent`, dropping the cell if it cancels.
    pub fn add_term(&mut self, exponent: BigInt, coefficient: BigInt) {
        use std::collections::btree_map::Entry;
        if coefficient.is_zero() {
            return;
        }
        match self.terms.entry(exponent) {
            Entry::Vacant(slot) => {
                slot.insert(coefficient);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += coefficient;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BigInt, &BigInt)> {
        self.terms.iter()
    }

    pub fn max_exponent(&self) -> Option<&BigInt> {
        self.terms.keys().next_back()
    }

    pub fn min_exponent(&self) -> Option<&BigInt> {
        self.terms.keys().next()
    }

    pub fn has_negative_exponent(&self) -> bool {
        self.min_exponent().is_some_and(|e| e.is_negative())
    }

    /// Stored coefficient at `exponent`, zero when absent.
    pub fn coefficient(&self, exponent: &BigInt) -> BigInt {
        self.terms.get(exponent).cloned().unwrap_or_default()
    }

    /// Term-wise convolution product.
    pub fn mul(&self, other: &SparsePoly) -> SparsePoly {
        let mut out = SparsePoly::default();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.add_term(ea + eb, ca * cb);
            }
        }
        out
    }

    /// The `n`-th formal derivative, term by term: `c * x^e` becomes
    /// `c * e * (e-1) * ... * (e-n+1) * x^(e-n)`, and terms of degree
    /// below `n` vanish. Requires non-negative exponents.
    pub fn nth_derivative(&self, n: u64) -> Result<SparsePoly> {
        if self.has_negative_exponent() {
            return Err(Error::NegativeExponentPresent);
        }
        let order = BigInt::from(n);
        let mut out = SparsePoly::default();
        for (e, c) in &self.terms {
            if *e < order {
                continue;
            }
            let mut scaled = c.clone();
            let mut factor = e.clone();
            for _ in 0..n {
                scaled *= &factor;
                factor -= 1;
            }
            out.add_term(e - &order, scaled);
        }
        Ok(out)
    }

    /// Reads the coefficient of `x^n` the long way: differentiate `n` times,
    /// evaluate at zero, divide by `n!`. Exact by construction; exists to
    /// cross-check the direct lookup, not to be fast.
    pub fn derivative_read(&self, n: u64) -> Result<BigInt> {
        let derivative = self.nth_derivative(n)?;
        let at_zero = derivative.coefficient(&BigInt::zero());
        if at_zero.is_zero() {
            return Ok(BigInt::zero());
        }
        let divisor = factorial(n);
        let (q, r) = num::Integer::div_rem(&at_zero, &divisor);
        assert!(r.is_zero(), "derivative at zero must divide n!");
        Ok(q)
    }

    /// `{"exponent": "coefficient"}` with decimal strings.
    pub fn to_json_map(&self) -> JsonValue {
        let mut map = JsonMap::new();
        for (e, c) in &self.terms {
            map.insert(e.to_string(), JsonValue::String(c.to_string()));
        }
        JsonValue::Object(map)
    }

    pub fn from_json_map(value: &JsonValue) -> std::result::Result<Self, String> {
        let obj = value.as_object().ok_or("expected a JSON object")?;
        let mut p = SparsePoly::default();
        for (k, v) in obj {
            let e: BigInt = k.parse().map_err(|_| format!("bad exponent {k:?}"))?;
            let text = v.as_str().ok_or("coefficients must be strings")?;
            let c: BigInt = text.parse().map_err(|_| format!("bad coefficient {v:?}"))?;
            p.add_term(e, c);
        }
        Ok(p)
    }
}

fn factorial(n: u64) -> BigInt {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= k;
    }
    acc
}

/// Expands the full factor product for a validated integer-valued instance.
pub fn expand(inst: &Instance) -> Result<SparsePoly> {
    expand_with_cap(inst, DEFAULT_TERM_CAP)
}

pub fn expand_with_cap(inst: &Instance, cap: usize) -> Result<SparsePoly> {
    inst.validate()?;
    if inst.variant() == Variant::Rational {
        return Err(Error::UnsupportedVariant {
            op: "expand",
            variant: inst.variant(),
        });
    }
    let mut poly = SparsePoly::constant(1);
    for a in inst.int_values()? {
        // poly *= 1 + x^a, i.e. add a copy of every term shifted by a.
        let shifted: Vec<(BigInt, BigInt)> = poly
            .terms
            .iter()
            .map(|(e, c)| (e + &a, c.clone()))
            .collect();
        for (e, c) in shifted {
            poly.add_term(e, c);
        }
        if poly.num_terms() > cap {
            return Err(Error::SizeLimitExceeded { cap });
        }
    }
    Ok(poly)
}

/// Number of nonempty subsets of the expanded instance summing to `target`.
/// At zero this strips the constant contributed by the empty subset.
pub fn subset_multiplicity(poly: &SparsePoly, target: &BigInt) -> BigInt {
    let raw = poly.coefficient(target);
    if target.is_zero() {
        raw - 1
    } else {
        raw
    }
}

/// Collapses a non-negative-exponent polynomial to its reachability bits.
pub fn to_tape_integer(poly: &SparsePoly) -> Result<TapeInteger> {
    if poly.has_negative_exponent() {
        return Err(Error::NegativeExponentPresent);
    }
    let mut bits = BigUint::zero();
    for (e, c) in poly.terms() {
        if c.is_positive() {
            let j = e.to_u64().expect("exponent fits the tape range");
            if j >= 1 {
                bits.set_bit(j, true);
            }
        }
    }
    Ok(TapeInteger(bits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tape;
    use proptest::prelude::*;

    fn nat(values: Vec<i64>) -> Instance {
        let target = values.iter().sum();
        Instance::natural(values, target).unwrap()
    }

    fn poly_pairs(p: &SparsePoly) -> Vec<(i64, i64)> {
        p.terms()
            .map(|(e, c)| (e.to_i64().unwrap(), c.to_i64().unwrap()))
            .collect()
    }

    #[test]
    fn expand_three_values() {
        let p = expand(&nat(vec![3, 4, 1])).unwrap();
        assert_eq!(
            poly_pairs(&p),
            vec![(0, 1), (1, 1), (3, 1), (4, 2), (5, 1), (7, 1), (8, 1)]
        );
    }

    #[test]
    fn expand_cancelling_pair() {
        let inst = Instance::integer(vec![2, -2], 0).unwrap();
        let p = expand(&inst).unwrap();
        assert_eq!(poly_pairs(&p), vec![(-2, 1), (0, 2), (2, 1)]);
    }

    #[test]
    fn expand_single_factor() {
        let p = expand(&nat(vec![7])).unwrap();
        assert_eq!(poly_pairs(&p), vec![(0, 1), (7, 1)]);
    }

    #[test]
    fn coefficient_lookup() {
        let p = expand(&nat(vec![3, 4, 1])).unwrap();
        assert_eq!(p.coefficient(&BigInt::from(4)), BigInt::from(2));
        assert_eq!(p.coefficient(&BigInt::from(2)), BigInt::zero());
    }

    #[test]
    fn subset_multiplicity_strips_empty_subset() {
        let inst = Instance::integer(vec![2, -2], 0).unwrap();
        let p = expand(&inst).unwrap();
        assert_eq!(subset_multiplicity(&p, &BigInt::zero()), BigInt::one());
        let nat_poly = expand(&nat(vec![3, 4, 1])).unwrap();
        assert_eq!(subset_multiplicity(&nat_poly, &BigInt::zero()), BigInt::zero());
        assert_eq!(
            subset_multiplicity(&nat_poly, &BigInt::from(4)),
            BigInt::from(2)
        );
    }

    #[test]
    fn derivative_reads_match_lookup() {
        let p = expand(&nat(vec![3, 4, 1])).unwrap();
        assert_eq!(p.derivative_read(4).unwrap(), BigInt::from(2));
        assert_eq!(p.derivative_read(0).unwrap(), BigInt::one());

        let triple = expand(&nat(vec![1, 1, 1])).unwrap();
        assert_eq!(triple.derivative_read(2).unwrap(), BigInt::from(3));
    }

    #[test]
    fn derivative_rejects_negative_exponents() {
        let inst = Instance::integer(vec![2, -2], 0).unwrap();
        let p = expand(&inst).unwrap();
        assert!(matches!(
            p.derivative_read(2),
            Err(Error::NegativeExponentPresent)
        ));
    }

    #[test]
    fn tape_integer_encoding() {
        let p = expand(&nat(vec![3, 4, 1])).unwrap();
        let t = to_tape_integer(&p).unwrap();
        assert_eq!(t.value(), &BigUint::from(442u32));

        let single = to_tape_integer(&expand(&nat(vec![1])).unwrap()).unwrap();
        assert_eq!(single.value(), &BigUint::from(2u32));

        let dup = to_tape_integer(&expand(&nat(vec![2, 2])).unwrap()).unwrap();
        assert_eq!(dup.value(), &BigUint::from(20u32));
        assert!(!dup.bit(0));
    }

    #[test]
    fn expansion_cap_trips() {
        let values: Vec<i64> = (0..8).map(|i| 1 << i).collect();
        let target = values.iter().sum();
        let inst = Instance::natural(values, target).unwrap();
        assert!(matches!(
            expand_with_cap(&inst, 100),
            Err(Error::SizeLimitExceeded { cap: 100 })
        ));
    }

    #[test]
    fn json_map_round_trip() {
        let p = expand(&nat(vec![3, 4, 1])).unwrap();
        let json = p.to_json_map();
        assert_eq!(json["4"], JsonValue::String("2".into()));
        let back = SparsePoly::from_json_map(&json).unwrap();
        assert_eq!(p, back);
    }

    fn arb_poly() -> impl Strategy<Value = SparsePoly> {
        proptest::collection::btree_map(0u64..40, -50i64..50, 1..12)
            .prop_map(SparsePoly::from_terms)
    }

    proptest! {
        #[test]
        fn derivative_equals_lookup_everywhere(p in arb_poly()) {
            let max = p.max_exponent().and_then(|e| e.to_u64()).unwrap_or(0);
            for n in 0..=max + 2 {
                prop_assert_eq!(p.derivative_read(n).unwrap(), p.coefficient(&BigInt::from(n)));
            }
        }

        #[test]
        fn expansion_is_multiplicative(
            left in proptest::collection::vec(1i64..30, 1..5),
            right in proptest::collection::vec(1i64..30, 1..5),
        ) {
            let mut joined = left.clone();
            joined.extend_from_slice(&right);
            let whole = expand(&nat(joined)).unwrap();
            let product = expand(&nat(left)).unwrap().mul(&expand(&nat(right)).unwrap());
            prop_assert_eq!(whole, product);
        }

        #[test]
        fn nonconstant_coefficients_count_subsets(values in proptest::collection::vec(1i64..40, 1..10)) {
            let n = values.len() as u32;
            let p = expand(&nat(values)).unwrap();
            let total: BigInt = p
                .terms()
                .filter(|(e, _)| !e.is_zero())
                .map(|(_, c)| c.clone())
                .sum();
            prop_assert_eq!(total, BigInt::from((1u64 << n) - 1));
        }

        #[test]
        fn tape_integer_matches_bool_tape(values in proptest::collection::vec(1i64..50, 1..9)) {
            let inst = nat(values);
            let bits = to_tape_integer(&expand(&inst).unwrap()).unwrap();
            let bools = tape::run_bool(&inst).unwrap();
            for j in 0..=bools.total() as u64 {
                prop_assert_eq!(bits.bit(j), bools.get(j as usize));
            }
        }
    }
}
