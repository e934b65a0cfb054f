//! Frequency-domain machinery.
//!
//! An instance becomes the product signal `Π (1 + e^{j2π·a·t})`, one factor
//! per value — constructible in linear time, never expanded unless asked.
//! Every achievable subset sum shows up as a unit impulse at its own integer
//! frequency (with multiplicity), plus a DC impulse for the empty subset.
//! Reading a single frequency back out is where the cost lives: either
//! expand the whole spectrum, or correlate over enough samples that no two
//! achievable sums collide modulo the sample count.

use std::collections::BTreeMap;

use num::complex::Complex64;
use num::{BigInt, BigUint, One, ToPrimitive};
use serde_json::{Map as JsonMap, Value as JsonValue};

use crate::error::{Error, Result};
use crate::instance::{Instance, Variant};

pub use crate::genfunc::DEFAULT_TERM_CAP;

/// ZSV read threshold: the DC integral is `1 + (zero-sum subset count)`, and
/// counts are integers, so anything above 1.5 means at least one hit.
pub const ZSV_THRESHOLD: f64 = 1.5;

/// Unexpanded factored signal; one integer frequency per instance value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LazyProduct {
    factors: Vec<i64>,
}

/// Fully expanded impulse spectrum: frequency → multiplicity. The entry at 0
/// always carries at least the empty-subset impulse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Spectrum {
    impulses: BTreeMap<i64, BigUint>,
}

impl LazyProduct {
    pub fn new(factors: Vec<i64>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::EmptyInstance);
        }
        Ok(LazyProduct { factors })
    }

    /// Builds the factor list for a validated integer-valued instance. O(N).
    pub fn generate(inst: &Instance) -> Result<Self> {
        inst.validate()?;
        if inst.variant() == Variant::Rational {
            return Err(Error::UnsupportedVariant {
                op: "signal generation",
                variant: inst.variant(),
            });
        }
        let factors = inst
            .int_values()?
            .into_iter()
            .map(|v| v.to_i64().ok_or(Error::FrequencyOutOfRange(v)))
            .collect::<Result<Vec<i64>>>()?;
        LazyProduct::new(factors)
    }

    pub fn factors(&self) -> &[i64] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Largest achievable sum (all non-negative factors taken).
    pub fn max_sum(&self) -> i128 {
        self.factors.iter().filter(|&&a| a > 0).map(|&a| a as i128).sum()
    }

    /// Smallest achievable sum (all negative factors taken).
    pub fn min_sum(&self) -> i128 {
        self.factors.iter().filter(|&&a| a < 0).map(|&a| a as i128).sum()
    }

    /// Width of the achievable-sum range; a correlation needs strictly more
    /// samples than this to be alias-free.
    pub fn span(&self) -> u128 {
        (self.max_sum() - self.min_sum()) as u128
    }

    /// Pointwise product evaluation, O(N) per sample.
    pub fn evaluate(&self, t: f64) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for &a in &self.factors {
            let theta = std::f64::consts::TAU * a as f64 * t;
            acc *= Complex64::new(1.0, 0.0) + Complex64::from_polar(1.0, theta);
        }
        acc
    }

    /// Evaluation at the grid point `t = k / samples` with phases reduced
    /// modulo one turn in exact integer arithmetic, so root-of-unity
    /// orthogonality survives floating point untouched.
    fn evaluate_grid(&self, k: u64, samples: u64) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for &a in &self.factors {
            acc *= Complex64::new(1.0, 0.0) + grid_phasor(a as i128 * k as i128, samples);
        }
        acc
    }
}

/// `e^{j2π·num/samples}` with `num` reduced into `[0, samples)` exactly.
fn grid_phasor(num: i128, samples: u64) -> Complex64 {
    let reduced = num.rem_euclid(samples as i128) as f64;
    Complex64::from_polar(1.0, std::f64::consts::TAU * reduced / samples as f64)
}

/// Fixed-shape pairwise reduction over `0..n`; the tree depends only on `n`,
/// so results are bit-reproducible however the leaves are produced.
fn pairwise_sum(lo: u64, hi: u64, term: &mut impl FnMut(u64) -> Complex64) -> Complex64 {
    const LEAF: u64 = 64;
    if hi - lo <= LEAF {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in lo..hi {
            acc += term(k);
        }
        acc
    } else {
        let mid = lo + (hi - lo) / 2;
        pairwise_sum(lo, mid, term) + pairwise_sum(mid, hi, term)
    }
}

impl Spectrum {
    pub fn impulses(&self) -> &BTreeMap<i64, BigUint> {
        &self.impulses
    }

    /// Raw impulse weight at `b`, including the empty-subset unit at DC.
    pub fn weight(&self, b: i64) -> BigUint {
        self.impulses.get(&b).cloned().unwrap_or_default()
    }

    /// Multiplicity of nonempty subsets summing to `b`: the impulse weight,
    /// with the bookkeeping unit stripped at DC.
    pub fn fourier_read(&self, b: i64) -> BigUint {
        let raw = self.weight(b);
        if b == 0 {
            raw - BigUint::one()
        } else {
            raw
        }
    }

    /// Sum of all impulse weights; always `2^N`.
    pub fn total_weight(&self) -> BigUint {
        self.impulses.values().sum()
    }

    /// `{"frequency": "multiplicity"}` with decimal strings.
    pub fn to_json_map(&self) -> JsonValue {
        let mut map = JsonMap::new();
        for (b, m) in &self.impulses {
            map.insert(b.to_string(), JsonValue::String(m.to_string()));
        }
        JsonValue::Object(map)
    }
}

/// Expands the factored signal into its impulse spectrum by iterated shifted
/// merges. Worst case `2^N` impulses; guarded by the same cap as polynomial
/// expansion.
pub fn expand_spectrum(sig: &LazyProduct) -> Result<Spectrum> {
    expand_spectrum_with_cap(sig, DEFAULT_TERM_CAP)
}

pub fn expand_spectrum_with_cap(sig: &LazyProduct, cap: usize) -> Result<Spectrum> {
    let mut impulses = BTreeMap::from([(0i64, BigUint::one())]);
    for &a in sig.factors() {
        let shifted: Vec<(i64, BigUint)> = impulses
            .iter()
            .map(|(&b, m)| {
                b.checked_add(a)
                    .map(|nb| (nb, m.clone()))
                    .ok_or_else(|| Error::FrequencyOutOfRange(BigInt::from(b) + a))
            })
            .collect::<Result<_>>()?;
        for (b, m) in shifted {
            *impulses.entry(b).or_default() += m;
        }
        if impulses.len() > cap {
            return Err(Error::SizeLimitExceeded { cap });
        }
    }
    Ok(Spectrum { impulses })
}

fn alias_check(sig: &LazyProduct, samples: u64) -> Result<()> {
    let span = sig.span();
    if samples as u128 <= span {
        return Err(Error::AliasRisk { samples, span });
    }
    Ok(())
}

/// Single-bin correlation over one period, no alias guard: averages
/// `S(k/K) · e^{-j2π·b·k/K}` over the K-point grid. With `K > span` the
/// result is the impulse weight at `b` (empty subset included at DC) up to
/// floating rounding; with `K <= span` sums congruent to `b` modulo `K`
/// fold onto the same bin.
pub fn correlate(sig: &LazyProduct, b: i64, samples: u64) -> Complex64 {
    assert!(samples > 0, "correlation needs at least one sample");
    let mut term = |k: u64| {
        sig.evaluate_grid(k, samples) * grid_phasor(-(b as i128) * k as i128, samples)
    };
    pairwise_sum(0, samples, &mut term) / samples as f64
}

/// Alias-guarded correlation read of the impulse weight at `b`.
pub fn convolution_read(sig: &LazyProduct, b: i64, samples: u64) -> Result<Complex64> {
    alias_check(sig, samples)?;
    Ok(correlate(sig, b, samples))
}

/// Mean of the signal over one period: `1 + (number of nonempty zero-sum
/// subsets)` when the sample count clears the span. Compare against
/// [`ZSV_THRESHOLD`] for the zero-sum decision.
pub fn dc_integral(sig: &LazyProduct, samples: u64) -> Result<f64> {
    alias_check(sig, samples)?;
    Ok(correlate(sig, 0, samples).re)
}

pub fn zsv_decision(dc_value: f64) -> bool {
    dc_value > ZSV_THRESHOLD
}
