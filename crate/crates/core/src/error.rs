use num::BigInt;
use thiserror::Error;

use crate::instance::Variant;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("instance has no values")]
    EmptyInstance,
    #[error("natural variant requires values >= 1, got {0}")]
    NonNaturalValue(BigInt),
    #[error("zero-sum variant requires target 0, got {0}")]
    NonZeroTarget(BigInt),
    #[error("rational value has a zero denominator")]
    ZeroDenominator,
    #[error("{op} does not support the {variant} variant")]
    UnsupportedVariant { op: &'static str, variant: Variant },
    #[error("tape of {0} cells exceeds addressable memory")]
    TapeTooLarge(BigInt),
    #[error("value {0} does not fit the signed 64-bit frequency range")]
    FrequencyOutOfRange(BigInt),
    #[error("expansion exceeded the {cap}-term cap")]
    SizeLimitExceeded { cap: usize },
    #[error("polynomial has negative exponents")]
    NegativeExponentPresent,
    #[error("{samples} samples cannot resolve a frequency span of {span}: sums alias modulo the sample count")]
    AliasRisk { samples: u64, span: u128 },
    #[error("sample rate {rate} Hz is below the required rate of {required} Hz for this signal")]
    NyquistViolation { rate: u32, required: f64 },
    #[error("invalid detector config: {0}")]
    InvalidConfig(String),
    #[error("left shift by {shift} exceeds the accumulated offset {offset}")]
    InvalidLeftShift { shift: u64, offset: u64 },
    #[error("symbol {symbol} is outside the alphabet of size {alphabet}")]
    SymbolOutOfAlphabet { symbol: u32, alphabet: u32 },
    #[error("tape alphabet must have at least two symbols, got {0}")]
    AlphabetTooSmall(u32),
    #[error("machine references unknown state {0:?}")]
    UnknownState(String),
    #[error("no transition for state {state:?} reading symbol {symbol}")]
    MissingTransition { state: String, symbol: u32 },
    #[error("polynomial tape diverged from the reference tape at step {step}")]
    LockstepDivergence { step: usize },
    #[error("instance with {n} values exceeds the oracle limit of {limit}")]
    TooLargeForOracle { n: usize, limit: usize },
    #[error("backend {0} does not produce a multiplicity map")]
    NoMultiplicityMap(String),
    #[error("backend {backend} disagrees at sum {sum}: expected {expected}, got {got}")]
    MismatchFound {
        backend: String,
        sum: String,
        expected: String,
        got: String,
    },
    #[error("malformed waveform data: {0}")]
    MalformedWaveform(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
