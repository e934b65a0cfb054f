//! Problem instances, variants, and the reductions between them.

use std::fmt;
use std::str::FromStr;

use num::{BigInt, BigRational, BigUint, Integer, One, Zero};
use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeMap, SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Problem flavor. Integer-valued variants keep a denominator of 1 internally.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Values are integers >= 1, target is a non-negative integer.
    Natural,
    /// Values and target are arbitrary integers.
    Integer,
    /// Values are arbitrary integers, target is fixed to 0.
    ZeroSum,
    /// Values and target are exact fractions.
    Rational,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Natural => "natural",
            Variant::Integer => "integer",
            Variant::ZeroSum => "zero-sum",
            Variant::Rational => "rational",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "natural" => Ok(Variant::Natural),
            "integer" => Ok(Variant::Integer),
            "zero-sum" => Ok(Variant::ZeroSum),
            "rational" => Ok(Variant::Rational),
            other => Err(format!("unknown variant {other:?}")),
        }
    }
}

/// A validated subset-sum instance.
///
/// Values and target are stored as exact fractions; every variant except
/// [`Variant::Rational`] guarantees a denominator of 1. Instances are
/// immutable once constructed, so they can be shared freely across threads.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    variant: Variant,
    values: Vec<BigRational>,
    target: BigRational,
}

/// Builds an exact fraction, rejecting zero denominators.
pub fn checked_ratio(numer: BigInt, denom: BigInt) -> Result<BigRational> {
    if denom.is_zero() {
        return Err(Error::ZeroDenominator);
    }
    Ok(BigRational::new(numer, denom))
}

impl Instance {
    pub fn new(variant: Variant, values: Vec<BigRational>, target: BigRational) -> Result<Self> {
        let inst = Instance {
            variant,
            values,
            target,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn natural<I>(values: Vec<I>, target: I) -> Result<Self>
    where
        I: Into<BigInt>,
    {
        Self::from_integers(Variant::Natural, values, target)
    }

    pub fn integer<I>(values: Vec<I>, target: I) -> Result<Self>
    where
        I: Into<BigInt>,
    {
        Self::from_integers(Variant::Integer, values, target)
    }

    pub fn zero_sum<I>(values: Vec<I>) -> Result<Self>
    where
        I: Into<BigInt>,
    {
        Self::from_integers(Variant::ZeroSum, values, 0)
    }

    pub fn rational(values: Vec<BigRational>, target: BigRational) -> Result<Self> {
        Self::new(Variant::Rational, values, target)
    }

    fn from_integers<I>(variant: Variant, values: Vec<I>, target: impl Into<BigInt>) -> Result<Self>
    where
        I: Into<BigInt>,
    {
        let values = values
            .into_iter()
            .map(|v| BigRational::from_integer(v.into()))
            .collect();
        Self::new(variant, values, BigRational::from_integer(target.into()))
    }

    /// Re-checks every variant invariant. Construction already runs this, so
    /// calling it on an existing instance always succeeds; it exists so the
    /// check itself can be exercised and composed.
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::EmptyInstance);
        }
        match self.variant {
            Variant::Natural => {
                for v in &self.values {
                    if !v.is_integer() || v.numer() <= &BigInt::zero() {
                        return Err(Error::NonNaturalValue(ratio_as_int(v)));
                    }
                }
                if !self.target.is_integer() {
                    return Err(Error::NonNaturalValue(ratio_as_int(&self.target)));
                }
            }
            Variant::Integer => {
                for v in self.values.iter().chain(std::iter::once(&self.target)) {
                    if !v.is_integer() {
                        return Err(Error::ZeroDenominator);
                    }
                }
            }
            Variant::ZeroSum => {
                for v in &self.values {
                    if !v.is_integer() {
                        return Err(Error::ZeroDenominator);
                    }
                }
                if !self.target.is_zero() {
                    return Err(Error::NonZeroTarget(ratio_as_int(&self.target)));
                }
            }
            // BigRational keeps fractions reduced with a positive denominator,
            // so there is nothing further to check.
            Variant::Rational => {}
        }
        Ok(())
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[BigRational] {
        &self.values
    }

    pub fn target(&self) -> &BigRational {
        &self.target
    }

    /// Integer views of the values; errors for the rational variant.
    pub fn int_values(&self) -> Result<Vec<BigInt>> {
        if self.variant == Variant::Rational {
            return Err(Error::UnsupportedVariant {
                op: "int_values",
                variant: self.variant,
            });
        }
        Ok(self.values.iter().map(ratio_as_int).collect())
    }

    pub fn int_target(&self) -> Result<BigInt> {
        if self.variant == Variant::Rational {
            return Err(Error::UnsupportedVariant {
                op: "int_target",
                variant: self.variant,
            });
        }
        Ok(ratio_as_int(&self.target))
    }

    /// Clears denominators: multiplies every value and the target by the
    /// least common multiple of all denominators, yielding an equivalent
    /// integer instance. The decision (and every multiplicity) is preserved.
    /// Returns the integer instance and the scale factor applied.
    pub fn reduce_rational(&self) -> Result<(Instance, BigInt)> {
        if self.variant != Variant::Rational {
            return Err(Error::UnsupportedVariant {
                op: "reduce_rational",
                variant: self.variant,
            });
        }
        let mut scale = BigInt::one();
        for v in self.values.iter().chain(std::iter::once(&self.target)) {
            scale = scale.lcm(v.denom());
        }
        let scale_ratio = BigRational::from_integer(scale.clone());
        let values = self
            .values
            .iter()
            .map(|v| v * &scale_ratio)
            .collect::<Vec<_>>();
        let target = &self.target * &scale_ratio;
        let inst = Instance::new(Variant::Integer, values, target)?;
        Ok((inst, scale))
    }

    /// Divides every value exactly by the total sum, mapping all achievable
    /// sums into (0, 1]. Only meaningful for the natural variant, where the
    /// total is positive.
    pub fn scale_to_unit(&self) -> Result<Vec<BigRational>> {
        if self.variant != Variant::Natural {
            return Err(Error::UnsupportedVariant {
                op: "scale_to_unit",
                variant: self.variant,
            });
        }
        let total: BigRational = self.values.iter().sum();
        Ok(self.values.iter().map(|v| v / &total).collect())
    }
}

fn ratio_as_int(r: &BigRational) -> BigInt {
    // Truncates; only called where the denominator is known to be 1 or the
    // value is headed into an error message.
    r.to_integer()
}

/// Which solver produced an answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Backend {
    TapeCount,
    TapeBool,
    GenFunc,
    SpectralFourier,
    SpectralConv,
    DcIntegral,
    Detector,
    Oracle,
}

impl Backend {
    pub const ALL: [Backend; 8] = [
        Backend::TapeCount,
        Backend::TapeBool,
        Backend::GenFunc,
        Backend::SpectralFourier,
        Backend::SpectralConv,
        Backend::DcIntegral,
        Backend::Detector,
        Backend::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Backend::TapeCount => "tape-count",
            Backend::TapeBool => "tape-bool",
            Backend::GenFunc => "genfunc",
            Backend::SpectralFourier => "spectral-fourier",
            Backend::SpectralConv => "spectral-conv",
            Backend::DcIntegral => "dc-integral",
            Backend::Detector => "detector",
            Backend::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Backend::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| format!("unknown backend {s:?}"))
    }
}

/// Outcome of a solve. `multiplicity` is the number of nonempty subsets that
/// hit the target; detectors and boolean tapes may only know the decision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Answer {
    pub decision: bool,
    pub multiplicity: Option<BigUint>,
    pub backend: Backend,
}

impl Answer {
    pub fn counted(backend: Backend, multiplicity: BigUint) -> Self {
        Answer {
            decision: !multiplicity.is_zero(),
            multiplicity: Some(multiplicity),
            backend,
        }
    }

    pub fn decided(backend: Backend, decision: bool) -> Self {
        Answer {
            decision,
            multiplicity: None,
            backend,
        }
    }
}

// ---------------------------------------------------------------------------
// JSON wire format
//
// {"variant": "natural", "values": [3, 4, 1], "target": 8}
//
// Rational entries are two-element arrays [numerator, denominator]. Integers
// beyond 2^53 - 1 travel as decimal strings so consumers that read JSON
// numbers as doubles cannot silently corrupt them.
// ---------------------------------------------------------------------------

const MAX_SAFE_JSON_INT: u64 = (1 << 53) - 1;

fn serialize_bigint<S: Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.magnitude() <= &BigUint::from(MAX_SAFE_JSON_INT) {
        // Fits a double exactly.
        let as_i64 = i64::try_from(v.clone()).expect("checked magnitude");
        s.serialize_i64(as_i64)
    } else {
        s.serialize_str(&v.to_string())
    }
}

struct BigIntVisitor;

impl Visitor<'_> for BigIntVisitor {
    type Value = BigInt;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("an integer or a decimal string")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<BigInt, E> {
        Ok(BigInt::from(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<BigInt, E> {
        Ok(BigInt::from(v))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<BigInt, E> {
        if v.fract() == 0.0 && v.abs() <= MAX_SAFE_JSON_INT as f64 {
            Ok(BigInt::from(v as i64))
        } else {
            Err(E::custom(format!(
                "{v} is not an exactly representable integer; pass it as a string"
            )))
        }
    }

    fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<BigInt, E> {
        v.parse::<BigInt>()
            .map_err(|_| E::custom(format!("{v:?} is not a decimal integer")))
    }
}

fn deserialize_bigint<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigInt, D::Error> {
    d.deserialize_any(BigIntVisitor)
}

/// One instance entry on the wire: a plain integer or a `[numer, denom]` pair.
enum WireNumber {
    Int(BigInt),
    Pair(BigInt, BigInt),
}

impl WireNumber {
    fn into_ratio(self) -> Result<BigRational> {
        match self {
            WireNumber::Int(v) => Ok(BigRational::from_integer(v)),
            WireNumber::Pair(n, d) => checked_ratio(n, d),
        }
    }
}

impl<'de> Deserialize<'de> for WireNumber {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct WireVisitor;

        impl<'de> Visitor<'de> for WireVisitor {
            type Value = WireNumber;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an integer, a decimal string, or a [numer, denom] pair")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<WireNumber, E> {
                Ok(WireNumber::Int(BigInt::from(v)))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<WireNumber, E> {
                Ok(WireNumber::Int(BigInt::from(v)))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<WireNumber, E> {
                BigIntVisitor.visit_f64(v).map(WireNumber::Int)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<WireNumber, E> {
                BigIntVisitor.visit_str(v).map(WireNumber::Int)
            }

            fn visit_seq<A: SeqAccess<'de>>(
                self,
                mut seq: A,
            ) -> std::result::Result<WireNumber, A::Error> {
                let numer: BigIntField = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(0, &"[numer, denom]"))?;
                let denom: BigIntField = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(1, &"[numer, denom]"))?;
                if seq.next_element::<serde_json::Value>()?.is_some() {
                    return Err(de::Error::custom("rational pair has more than two entries"));
                }
                Ok(WireNumber::Pair(numer.0, denom.0))
            }
        }

        d.deserialize_any(WireVisitor)
    }
}

struct BigIntField(BigInt);

impl<'de> Deserialize<'de> for BigIntField {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        deserialize_bigint(d).map(BigIntField)
    }
}

impl Serialize for Instance {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        struct Entry<'a>(&'a BigRational, Variant);

        impl Serialize for Entry<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                if self.1 == Variant::Rational {
                    let mut seq = s.serialize_seq(Some(2))?;
                    seq.serialize_element(&BigIntJson(self.0.numer()))?;
                    seq.serialize_element(&BigIntJson(self.0.denom()))?;
                    seq.end()
                } else {
                    BigIntJson(self.0.numer()).serialize(s)
                }
            }
        }

        struct BigIntJson<'a>(&'a BigInt);

        impl Serialize for BigIntJson<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                serialize_bigint(self.0, s)
            }
        }

        struct Entries<'a>(&'a Instance);

        impl Serialize for Entries<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut seq = s.serialize_seq(Some(self.0.values.len()))?;
                for v in &self.0.values {
                    seq.serialize_element(&Entry(v, self.0.variant))?;
                }
                seq.end()
            }
        }

        let mut map = s.serialize_map(Some(3))?;
        map.serialize_entry("variant", self.variant.name())?;
        map.serialize_entry("values", &Entries(self))?;
        map.serialize_entry("target", &Entry(&self.target, self.variant))?;
        map.end()
    }
}

impl<'de> Deserialize<'de> for Instance {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            variant: String,
            values: Vec<WireNumber>,
            target: WireNumber,
        }

        let raw = Raw::deserialize(d)?;
        let variant: Variant = raw.variant.parse().map_err(de::Error::custom)?;
        let values = raw
            .values
            .into_iter()
            .map(|w| w.into_ratio())
            .collect::<Result<Vec<_>>>()
            .map_err(de::Error::custom)?;
        let target = raw.target.into_ratio().map_err(de::Error::custom)?;
        Instance::new(variant, values, target).map_err(de::Error::custom)
    }
}
