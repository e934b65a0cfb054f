//! Sampled-signal detector: a software stand-in for reading the product
//! signal off the air.
//!
//! The factored signal is synthesized at a finite sample rate with every
//! frequency divided by a scaling factor `gamma`, optionally with additive
//! noise and interfering tones. A query for sum `b` then measures the
//! amplitude in the single bin at `b / gamma` and compares it against a
//! threshold. The observation window always spans a whole number of periods
//! of the scaled frequency grid, so a clean, aligned capture measures the
//! exact impulse weight.

use std::io::{Read, Write};

use num::complex::Complex64;
use num::rational::Rational64;
use num::{ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::spectral::LazyProduct;

const WAVEFORM_MAGIC: &[u8; 4] = b"SSWF";

/// An injected tone at a (normally non-achievable) integer sum index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interferer {
    pub sum_index: i64,
    pub amplitude: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectorConfig {
    /// Scaling factor: sum `b` lands at physical frequency `b / gamma`.
    pub gamma: Rational64,
    /// Passband half-width of the idealized filter; must stay below the
    /// `1 / gamma` spacing of neighboring sums.
    pub epsilon: Rational64,
    /// Samples per unit time.
    pub sample_rate: u32,
    /// Observation window length.
    pub duration: Rational64,
    /// Amplitude cutoff for a positive decision (raised by 1 at DC, where
    /// the empty subset always contributes one unit).
    pub threshold: f64,
    /// Per-component bound of the uniform additive noise.
    pub noise_amplitude: f64,
    /// PRNG seed for noise, recorded so runs reproduce exactly.
    pub seed: u64,
    pub interferers: Vec<Interferer>,
}

impl DetectorConfig {
    /// Builds a config with the default threshold (0.5) and passband
    /// half-width (half the grid spacing, `1 / (2*gamma)`).
    pub fn new(gamma: Rational64, sample_rate: u32, duration: Rational64) -> Result<Self> {
        if gamma <= Rational64::zero() {
            return Err(Error::InvalidConfig("gamma must be positive".into()));
        }
        let cfg = DetectorConfig {
            gamma,
            epsilon: gamma.recip() / 2,
            sample_rate,
            duration,
            threshold: 0.5,
            noise_amplitude: 0.0,
            seed: 0,
            interferers: Vec::new(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Picks an aligned window and an alias-safe power-of-two sample rate
    /// for the given signal.
    pub fn for_signal(gamma: Rational64, sig: &LazyProduct) -> Result<Self> {
        if gamma <= Rational64::zero() {
            return Err(Error::InvalidConfig("gamma must be positive".into()));
        }
        // An integer duration equal to gamma's numerator always spans whole
        // periods of the scaled grid.
        let duration = Rational64::from_integer(*gamma.numer());
        let floor = required_rate(sig, gamma);
        let mut rate: u32 = 16;
        while (rate as f64) <= floor {
            rate = rate
                .checked_mul(2)
                .ok_or_else(|| Error::InvalidConfig("signal needs an unreasonable rate".into()))?;
        }
        DetectorConfig::new(gamma, rate, duration)
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn with_noise(mut self, amplitude: f64, seed: u64) -> Self {
        self.noise_amplitude = amplitude;
        self.seed = seed;
        self
    }

    pub fn with_epsilon(mut self, epsilon: Rational64) -> Result<Self> {
        self.epsilon = epsilon;
        self.validate()?;
        Ok(self)
    }

    pub fn with_interferer(mut self, sum_index: i64, amplitude: f64) -> Self {
        self.interferers.push(Interferer {
            sum_index,
            amplitude,
        });
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma <= Rational64::zero() {
            return Err(Error::InvalidConfig("gamma must be positive".into()));
        }
        if self.epsilon <= Rational64::zero() || self.epsilon >= self.gamma.recip() {
            return Err(Error::InvalidConfig(format!(
                "epsilon must lie in (0, 1/gamma); got {} with gamma {}",
                self.epsilon, self.gamma
            )));
        }
        if self.duration <= Rational64::zero() {
            return Err(Error::InvalidConfig("duration must be positive".into()));
        }
        if self.sample_rate == 0 {
            return Err(Error::InvalidConfig("sample rate must be positive".into()));
        }
        // Whole periods of the 1/gamma grid keep bins leakage-free.
        if !(self.duration / self.gamma).is_integer() {
            return Err(Error::InvalidConfig(format!(
                "duration {} is not a whole number of grid periods (duration/gamma must be an integer)",
                self.duration
            )));
        }
        if !(self.duration * Rational64::from_integer(self.sample_rate as i64)).is_integer() {
            return Err(Error::InvalidConfig(
                "sample_rate * duration must be a whole number of samples".into(),
            ));
        }
        if self.noise_amplitude < 0.0 {
            return Err(Error::InvalidConfig("noise amplitude cannot be negative".into()));
        }
        Ok(())
    }

    /// Number of samples in the observation window.
    pub fn samples(&self) -> u64 {
        (self.duration * Rational64::from_integer(self.sample_rate as i64))
            .to_integer()
            .to_u64()
            .expect("validated positive sample count")
    }

    /// Exact cycles-per-sample denominator shared by every scaled tone:
    /// a tone at sum index `f` advances `f * q / (p * rate)` turns per
    /// sample, with `gamma = p / q`.
    fn phase_denominator(&self) -> i128 {
        *self.gamma.numer() as i128 * self.sample_rate as i128
    }

    fn phase_numerator(&self, sum_index: i64) -> i128 {
        let den = self.phase_denominator();
        (sum_index as i128 * *self.gamma.denom() as i128).rem_euclid(den)
    }
}

fn required_rate(sig: &LazyProduct, gamma: Rational64) -> f64 {
    let max_abs = sig.max_sum().abs().max(sig.min_sum().abs()) as f64;
    let gamma_f = *gamma.numer() as f64 / *gamma.denom() as f64;
    2.0 * max_abs / gamma_f
}

#[derive(Clone, Debug, PartialEq)]
pub struct Waveform {
    samples: Vec<Complex64>,
    sample_rate: u32,
}

impl Waveform {
    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    /// Binary export: 16-byte header (magic `SSWF`, LE u32 sample rate,
    /// LE u32 sample count, 4 reserved zero bytes) followed by interleaved
    /// LE f64 (re, im) pairs.
    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(WAVEFORM_MAGIC)?;
        w.write_all(&self.sample_rate.to_le_bytes())?;
        w.write_all(&(self.samples.len() as u32).to_le_bytes())?;
        w.write_all(&[0u8; 4])?;
        for s in &self.samples {
            w.write_all(&s.re.to_le_bytes())?;
            w.write_all(&s.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut header = [0u8; 16];
        r.read_exact(&mut header)?;
        if &header[0..4] != WAVEFORM_MAGIC {
            return Err(Error::MalformedWaveform("bad magic".into()));
        }
        let sample_rate = u32::from_le_bytes(header[4..8].try_into().unwrap());
        let count = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
        let mut samples = Vec::with_capacity(count);
        let mut buf = [0u8; 16];
        for _ in 0..count {
            r.read_exact(&mut buf)?;
            samples.push(Complex64::new(
                f64::from_le_bytes(buf[0..8].try_into().unwrap()),
                f64::from_le_bytes(buf[8..16].try_into().unwrap()),
            ));
        }
        Ok(Waveform {
            samples,
            sample_rate,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectionReport {
    pub queried_sum: i64,
    pub measured_amplitude: f64,
    pub threshold: f64,
    pub decision: bool,
    pub config: DetectorConfig,
}

/// Samples the scaled product signal over the configured window.
pub fn synthesize(sig: &LazyProduct, cfg: &DetectorConfig) -> Result<Waveform> {
    cfg.validate()?;
    let required = required_rate(sig, cfg.gamma);
    if cfg.sample_rate as f64 <= required {
        return Err(Error::NyquistViolation {
            rate: cfg.sample_rate,
            required,
        });
    }

    let total = cfg.samples();
    let den = cfg.phase_denominator();
    let factor_steps: Vec<i128> = sig
        .factors()
        .iter()
        .map(|&a| cfg.phase_numerator(a))
        .collect();
    let interferer_steps: Vec<(i128, f64)> = cfg
        .interferers
        .iter()
        .map(|i| (cfg.phase_numerator(i.sum_index), i.amplitude))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut samples = Vec::with_capacity(total as usize);
    for k in 0..total {
        let mut v = Complex64::new(1.0, 0.0);
        for &step in &factor_steps {
            v *= Complex64::new(1.0, 0.0) + phasor(step * k as i128, den);
        }
        for &(step, amp) in &interferer_steps {
            v += amp * phasor(step * k as i128, den);
        }
        if cfg.noise_amplitude > 0.0 {
            let a = cfg.noise_amplitude;
            v += Complex64::new(rng.gen_range(-a..=a), rng.gen_range(-a..=a));
        }
        samples.push(v);
    }
    Ok(Waveform {
        samples,
        sample_rate: cfg.sample_rate,
    })
}

/// `e^{j2π·num/den}` with the turn count reduced exactly.
fn phasor(num: i128, den: i128) -> Complex64 {
    let reduced = num.rem_euclid(den) as f64;
    Complex64::from_polar(1.0, std::f64::consts::TAU * reduced / den as f64)
}

/// Measures the single bin at `b / gamma` over the full window and applies
/// the threshold. On a noise-free, aligned capture the amplitude equals the
/// impulse weight at `b`.
pub fn detect(waveform: &Waveform, b: i64, cfg: &DetectorConfig) -> DetectionReport {
    let amplitude = correlate_bin(waveform, cfg.phase_numerator(b), cfg.phase_denominator());
    // The empty subset parks one unit of amplitude at DC.
    let threshold = if b == 0 {
        cfg.threshold + 1.0
    } else {
        cfg.threshold
    };
    DetectionReport {
        queried_sum: b,
        measured_amplitude: amplitude,
        threshold,
        decision: amplitude >= threshold,
        config: cfg.clone(),
    }
}

fn correlate_bin(waveform: &Waveform, step: i128, den: i128) -> f64 {
    let m = waveform.samples.len();
    let mut acc = sum_window(&waveform.samples, step, den, 0, m);
    acc /= m as f64;
    acc.norm()
}

// Fixed-shape pairwise tree, same scheme as the spectral reads.
fn sum_window(samples: &[Complex64], step: i128, den: i128, lo: usize, hi: usize) -> Complex64 {
    const LEAF: usize = 64;
    if hi - lo <= LEAF {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, s) in samples.iter().enumerate().take(hi).skip(lo) {
            acc += s * phasor(-step * k as i128, den);
        }
        acc
    } else {
        let mid = lo + (hi - lo) / 2;
        sum_window(samples, step, den, lo, mid) + sum_window(samples, step, den, mid, hi)
    }
}

/// Goertzel-style recurrence for an integer bin; kept as an independent
/// route to cross-check the direct correlation.
#[cfg(test)]
fn goertzel_bin(samples: &[Complex64], bin: i64) -> f64 {
    let m = samples.len();
    let omega = std::f64::consts::TAU * bin as f64 / m as f64;
    let coeff = 2.0 * omega.cos();
    let mut s1 = Complex64::new(0.0, 0.0);
    let mut s2 = Complex64::new(0.0, 0.0);
    for x in samples {
        let s = x + coeff * s1 - s2;
        s2 = s1;
        s1 = s;
    }
    let y = s1 - Complex64::from_polar(1.0, -omega) * s2;
    y.norm() / m as f64
}
