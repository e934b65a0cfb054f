//! Cross-backend comparison and runtime-growth measurement.
//!
//! Everything here is driven by seeded generators so any reported number can
//! be regenerated exactly from the parameters in the report.

use std::collections::BTreeMap;
use std::time::Instant;

use num::{BigInt, BigUint, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{Map as JsonMap, Value as JsonValue};

use crate::error::{Error, Result};
use crate::genfunc;
use crate::instance::{Backend, Instance, Variant};
use crate::oracle;
use crate::spectral::{self, LazyProduct};
use crate::tape::{self, CountTape};

// ---------------------------------------------------------------------------
// Seeded instance generation
// ---------------------------------------------------------------------------

/// Draws a random instance: natural values in `1..=max_value`, integer and
/// zero-sum values in `±1..=max_value` (never zero, so cancellation stays
/// meaningful).
pub fn random_instance(
    rng: &mut ChaCha8Rng,
    variant: Variant,
    n: usize,
    max_value: u64,
) -> Instance {
    assert!(n > 0 && max_value > 0, "generator needs a positive shape");
    let max = max_value as i64;
    match variant {
        Variant::Natural => {
            let values: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=max)).collect();
            let total: i64 = values.iter().sum();
            let target = rng.gen_range(0..=total);
            Instance::natural(values, target).expect("generated values satisfy the variant")
        }
        Variant::Integer | Variant::ZeroSum => {
            let values: Vec<i64> = (0..n)
                .map(|_| {
                    let v = rng.gen_range(1..=max);
                    if rng.gen_bool(0.5) {
                        v
                    } else {
                        -v
                    }
                })
                .collect();
            if variant == Variant::ZeroSum {
                Instance::zero_sum(values).expect("zero target is always valid")
            } else {
                let spread = values.iter().map(|v| v.abs()).sum::<i64>();
                let target = rng.gen_range(-spread..=spread);
                Instance::integer(values, target).expect("integers are unconstrained")
            }
        }
        Variant::Rational => {
            let values = (0..n)
                .map(|_| {
                    crate::instance::checked_ratio(
                        BigInt::from(rng.gen_range(-max..=max)),
                        BigInt::from(rng.gen_range(1..=8i64)),
                    )
                    .expect("nonzero denominator")
                })
                .collect::<Vec<_>>();
            let target = values.iter().sum();
            Instance::rational(values, target).expect("rationals are unconstrained")
        }
    }
}

/// Deterministic corpus: same seed, same instances.
pub fn seeded_corpus(
    seed: u64,
    count: usize,
    variants: &[Variant],
    max_n: usize,
    max_value: u64,
) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let variant = variants[i % variants.len()];
            let n = rng.gen_range(1..=max_n);
            random_instance(&mut rng, variant, n, max_value)
        })
        .collect()
}

/// The adversarial family: distinct powers of two make every subset sum
/// unique, forcing a full `2^n`-term expansion.
pub fn adversarial_instance(n: usize) -> Instance {
    assert!((1..=62).contains(&n));
    let values: Vec<i64> = (0..n).map(|i| 1i64 << i).collect();
    let target = values.iter().sum();
    Instance::natural(values, target).expect("powers of two are natural")
}

// ---------------------------------------------------------------------------
// Cross-backend comparison
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct Mismatch {
    pub sum: BigInt,
    pub expected: BigUint,
    pub got: BigUint,
}

#[derive(Clone, Debug)]
pub struct BackendCheck {
    pub backend: Backend,
    pub agreed: bool,
    pub mismatch: Option<Mismatch>,
}

/// Normalized multiplicity map (nonempty subsets only) for one exact backend.
pub fn multiplicity_map(
    inst: &Instance,
    backend: Backend,
    cap: usize,
) -> Result<BTreeMap<BigInt, BigUint>> {
    match backend {
        Backend::TapeCount => {
            let tape = tape::run_count(inst)?;
            Ok(tape
                .nonzero()
                .map(|(j, c)| (BigInt::from(j), c.clone()))
                .collect())
        }
        Backend::GenFunc => {
            let poly = genfunc::expand_with_cap(inst, cap)?;
            Ok(poly
                .terms()
                .filter_map(|(e, _c)| {
                    let m = genfunc::subset_multiplicity(&poly, e);
                    (!m.is_zero()).then(|| (e.clone(), m.to_biguint().expect("counts are positive")))
                })
                .collect())
        }
        Backend::SpectralFourier => {
            let sig = LazyProduct::generate(inst)?;
            let spectrum = spectral::expand_spectrum_with_cap(&sig, cap)?;
            Ok(spectrum
                .impulses()
                .iter()
                .filter_map(|(&b, _)| {
                    let m = spectrum.fourier_read(b);
                    (!m.is_zero()).then(|| (BigInt::from(b), m))
                })
                .collect())
        }
        Backend::Oracle => Ok(oracle::enumerate(inst)?.counts().clone()),
        other => Err(Error::NoMultiplicityMap(other.name().into())),
    }
}

/// Backends that produce full multiplicity maps for this instance. The
/// counting tape only handles natural values.
pub fn comparable_backends(inst: &Instance) -> Vec<Backend> {
    let mut backends = vec![Backend::GenFunc, Backend::SpectralFourier];
    if inst.variant() == Variant::Natural {
        backends.insert(0, Backend::TapeCount);
    }
    backends
}

/// Checks every exact backend against the enumeration oracle.
pub fn compare_instance(inst: &Instance, cap: usize) -> Result<Vec<BackendCheck>> {
    let truth = multiplicity_map(inst, Backend::Oracle, cap)?;
    let mut checks = Vec::new();
    for backend in comparable_backends(inst) {
        let got = multiplicity_map(inst, backend, cap)?;
        let mismatch = first_mismatch(&truth, &got);
        checks.push(BackendCheck {
            backend,
            agreed: mismatch.is_none(),
            mismatch,
        });
    }
    Ok(checks)
}

/// Errors with the first disagreement, if any.
pub fn verify_agreement(inst: &Instance, cap: usize) -> Result<()> {
    for check in compare_instance(inst, cap)? {
        if let Some(m) = check.mismatch {
            return Err(Error::MismatchFound {
                backend: check.backend.name().into(),
                sum: m.sum.to_string(),
                expected: m.expected.to_string(),
                got: m.got.to_string(),
            });
        }
    }
    Ok(())
}

fn first_mismatch(
    expected: &BTreeMap<BigInt, BigUint>,
    got: &BTreeMap<BigInt, BigUint>,
) -> Option<Mismatch> {
    let keys = expected.keys().chain(got.keys());
    for sum in keys {
        let want = expected.get(sum).cloned().unwrap_or_default();
        let have = got.get(sum).cloned().unwrap_or_default();
        if want != have {
            return Some(Mismatch {
                sum: sum.clone(),
                expected: want,
                got: have,
            });
        }
    }
    None
}

/// Sparse JSON view of a counting tape: `{"sum": "count"}`.
pub fn tape_json(tape: &CountTape) -> JsonValue {
    let mut map = JsonMap::new();
    for (j, c) in tape.nonzero() {
        map.insert(j.to_string(), JsonValue::String(c.to_string()));
    }
    JsonValue::Object(map)
}

// ---------------------------------------------------------------------------
// Runtime growth
// ---------------------------------------------------------------------------

/// What the growth driver can time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchTarget {
    /// Factored-signal construction plus one point evaluation.
    Generation,
    TapeCount,
    TapeBool,
    GenfuncExpand,
    ConvolutionRead,
}

impl BenchTarget {
    pub const ALL: [BenchTarget; 5] = [
        BenchTarget::Generation,
        BenchTarget::TapeCount,
        BenchTarget::TapeBool,
        BenchTarget::GenfuncExpand,
        BenchTarget::ConvolutionRead,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BenchTarget::Generation => "generation",
            BenchTarget::TapeCount => "tape-count",
            BenchTarget::TapeBool => "tape-bool",
            BenchTarget::GenfuncExpand => "genfunc-expand",
            BenchTarget::ConvolutionRead => "convolution-read",
        }
    }
}

impl std::str::FromStr for BenchTarget {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        BenchTarget::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown bench target {s:?}"))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthConfig {
    pub sizes: Vec<usize>,
    pub max_value: u64,
    pub repetitions: usize,
    pub seed: u64,
    pub targets: Vec<BenchTarget>,
    pub term_cap: usize,
}

impl GrowthConfig {
    pub fn new(sizes: Vec<usize>, max_value: u64, repetitions: usize, seed: u64) -> Self {
        GrowthConfig {
            sizes,
            max_value,
            repetitions,
            seed,
            targets: vec![BenchTarget::Generation],
            term_cap: genfunc::DEFAULT_TERM_CAP,
        }
    }

    pub fn with_targets(mut self, targets: Vec<BenchTarget>) -> Self {
        self.targets = targets;
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub target: BenchTarget,
    pub n: usize,
    pub median_ms: f64,
    pub mean_ms: f64,
    pub repetitions: usize,
    pub seed: u64,
    pub max_value: u64,
    /// Set when the configuration is infeasible for this target.
    pub skipped: Option<String>,
    /// Stored terms after expansion, for targets that expand.
    pub term_count: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SlopeFit {
    pub target: BenchTarget,
    pub slope: f64,
    pub points: usize,
    pub note: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub host: String,
    pub rows: Vec<BenchRow>,
    pub fits: Vec<SlopeFit>,
}

/// Keeps a single timed repetition above timer noise by looping the
/// operation until ~2ms have passed, then averaging.
fn time_once(mut op: impl FnMut()) -> f64 {
    let probe = Instant::now();
    op();
    let first = probe.elapsed().as_secs_f64() * 1e3;
    if first >= 2.0 {
        return first;
    }
    let iters = (2.0 / first.max(1e-6)).ceil().min(100_000.0) as usize;
    let start = Instant::now();
    for _ in 0..iters {
        op();
    }
    start.elapsed().as_secs_f64() * 1e3 / iters as f64
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    let mid = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[mid]
    } else {
        (xs[mid - 1] + xs[mid]) / 2.0
    }
}

/// Ordinary least squares on `(ln x, ln y)`; returns the slope.
pub fn fit_loglog(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 2 {
        return None;
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|(x, _)| x).sum::<f64>() / n;
    let my = logs.iter().map(|(_, y)| y).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    (sxx != 0.0).then(|| sxy / sxx)
}

/// Most cell operations (values times tape length) the growth driver will
/// spend on one counting-tape run; keeps a single row under a few seconds.
const TAPE_WORK_BUDGET: u128 = 200_000_000;
/// Largest correlation the growth driver will run.
const SAMPLE_BUDGET: u128 = 4_000_000;

pub fn run_growth(cfg: &GrowthConfig) -> BenchReport {
    let mut rows = Vec::new();
    for &target in &cfg.targets {
        for &n in &cfg.sizes {
            rows.push(growth_row(cfg, target, n));
        }
    }

    let fits = cfg
        .targets
        .iter()
        .filter_map(|&target| {
            let points: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.target == target && r.skipped.is_none())
                .map(|r| (r.n as f64, r.median_ms))
                .collect();
            let slope = fit_loglog(&points)?;
            let note = if points.len() < 3 {
                "fewer than three points; slope is indicative only".to_string()
            } else {
                format!("fitted on {} sizes", points.len())
            };
            Some(SlopeFit {
                target,
                slope,
                points: points.len(),
                note,
            })
        })
        .collect();

    BenchReport {
        host: format!("{} {}", std::env::consts::OS, std::env::consts::ARCH),
        rows,
        fits,
    }
}

fn growth_row(cfg: &GrowthConfig, target: BenchTarget, n: usize) -> BenchRow {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ n as u64);
    let inst = random_instance(&mut rng, Variant::Natural, n, cfg.max_value);
    let sig = LazyProduct::generate(&inst).expect("natural instances always generate");

    let mut row = BenchRow {
        target,
        n,
        median_ms: 0.0,
        mean_ms: 0.0,
        repetitions: cfg.repetitions,
        seed: cfg.seed,
        max_value: cfg.max_value,
        skipped: None,
        term_count: None,
    };

    let total_cells = sig.max_sum() as u128 + 1;
    let tape_work = total_cells * n as u128;
    match target {
        BenchTarget::TapeCount if tape_work > TAPE_WORK_BUDGET => {
            row.skipped = Some(format!(
                "counting tape needs ~{tape_work} cell operations, over the driver budget"
            ));
            return row;
        }
        BenchTarget::TapeBool if tape_work / 64 > TAPE_WORK_BUDGET => {
            row.skipped = Some(format!(
                "boolean tape needs ~{} word operations, over the driver budget",
                tape_work / 64
            ));
            return row;
        }
        BenchTarget::ConvolutionRead if sig.span() + 1 > SAMPLE_BUDGET => {
            row.skipped = Some(format!(
                "alias-free read needs {} samples, over the driver budget",
                sig.span() + 1
            ));
            return row;
        }
        BenchTarget::GenfuncExpand => {
            match genfunc::expand_with_cap(&inst, cfg.term_cap) {
                Ok(poly) => row.term_count = Some(poly.num_terms()),
                Err(_) => {
                    row.skipped = Some(format!("expansion exceeds the {}-term cap", cfg.term_cap));
                    return row;
                }
            }
        }
        _ => {}
    }

    let samples: Vec<f64> = (0..cfg.repetitions.max(1))
        .map(|_| match target {
            BenchTarget::Generation => time_once(|| {
                let sig = LazyProduct::generate(&inst).unwrap();
                std::hint::black_box(sig.evaluate(0.123456789));
            }),
            BenchTarget::TapeCount => time_once(|| {
                std::hint::black_box(tape::run_count(&inst).unwrap());
            }),
            BenchTarget::TapeBool => time_once(|| {
                std::hint::black_box(tape::run_bool(&inst).unwrap());
            }),
            BenchTarget::GenfuncExpand => time_once(|| {
                std::hint::black_box(genfunc::expand_with_cap(&inst, cfg.term_cap).unwrap());
            }),
            BenchTarget::ConvolutionRead => {
                let b = sig.factors()[0];
                let k = sig.span() as u64 + 1;
                time_once(|| {
                    std::hint::black_box(spectral::convolution_read(&sig, b, k).unwrap());
                })
            }
        })
        .collect();

    row.mean_ms = samples.iter().sum::<f64>() / samples.len() as f64;
    row.median_ms = median(samples);
    row
}

/// Expands the adversarial family and reports `(n, stored term count)`;
/// the count is `2^n` for every feasible size.
pub fn adversarial_term_counts(sizes: &[usize], cap: usize) -> Vec<(usize, Result<usize>)> {
    sizes
        .iter()
        .map(|&n| {
            let inst = adversarial_instance(n);
            (
                n,
                genfunc::expand_with_cap(&inst, cap).map(|p| p.num_terms()),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_deterministic() {
        let a = seeded_corpus(42, 20, &[Variant::Natural, Variant::Integer], 10, 64);
        let b = seeded_corpus(42, 20, &[Variant::Natural, Variant::Integer], 10, 64);
        assert_eq!(a, b);
        assert_ne!(a, seeded_corpus(43, 20, &[Variant::Natural], 10, 64));
    }

    #[test]
    fn backends_agree_on_fig_instance() {
        let inst = Instance::natural(vec![3, 4, 1], 8).unwrap();
        let checks = compare_instance(&inst, genfunc::DEFAULT_TERM_CAP).unwrap();
        assert_eq!(checks.len(), 3);
        assert!(checks.iter().all(|c| c.agreed));
        verify_agreement(&inst, genfunc::DEFAULT_TERM_CAP).unwrap();
    }

    #[test]
    fn mismatch_reports_first_disagreement() {
        let mut truth = BTreeMap::new();
        truth.insert(BigInt::from(3), BigUint::from(1u32));
        let mut bad = truth.clone();
        bad.insert(BigInt::from(5), BigUint::from(2u32));
        let m = first_mismatch(&truth, &bad).unwrap();
        assert_eq!(m.sum, BigInt::from(5));
        assert_eq!(m.expected, BigUint::zero());
        assert_eq!(m.got, BigUint::from(2u32));
    }

    #[test]
    fn slope_fit_recovers_powers() {
        let quadratic: Vec<(f64, f64)> = (1..=6).map(|n| (n as f64, (n * n) as f64)).collect();
        let slope = fit_loglog(&quadratic).unwrap();
        assert!((slope - 2.0).abs() < 1e-9);

        let linear: Vec<(f64, f64)> = (1..=6).map(|n| (n as f64, 3.0 * n as f64)).collect();
        assert!((fit_loglog(&linear).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn adversarial_counts_double() {
        for (n, count) in adversarial_term_counts(&[4, 6, 8], genfunc::DEFAULT_TERM_CAP) {
            assert_eq!(count.unwrap(), 1 << n);
        }
    }

    #[test]
    fn growth_driver_produces_rows_and_fits() {
        let cfg = GrowthConfig::new(vec![50, 100, 200], 1000, 2, 7)
            .with_targets(vec![BenchTarget::Generation, BenchTarget::TapeCount]);
        let report = run_growth(&cfg);
        assert_eq!(report.rows.len(), 6);
        assert!(report.rows.iter().all(|r| r.skipped.is_none()));
        assert_eq!(report.fits.len(), 2);
    }

    #[test]
    fn infeasible_targets_are_skipped_with_reasons() {
        let mut cfg = GrowthConfig::new(vec![30], u32::MAX as u64, 1, 7)
            .with_targets(vec![BenchTarget::ConvolutionRead, BenchTarget::GenfuncExpand]);
        cfg.term_cap = 1000;
        let report = run_growth(&cfg);
        assert!(report.rows.iter().all(|r| r.skipped.is_some()));
    }

    #[test]
    fn rational_instances_round_trip_through_reduction() {
        use num::BigRational;

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.gen_range(1..=8);
            let inst = random_instance(&mut rng, Variant::Rational, n, 9);
            let (reduced, scale) = inst.reduce_rational().unwrap();
            let rational_truth = oracle::enumerate_rational(&inst).unwrap();
            let integer_truth = oracle::enumerate(&reduced).unwrap();

            // Scaling is a bijection on subsets, so the whole multiplicity
            // map carries over, not just the target's entry.
            assert_eq!(rational_truth.len(), integer_truth.counts().len());
            let scale_ratio = BigRational::from_integer(scale.clone());
            for (sum, count) in &rational_truth {
                let scaled = (sum * &scale_ratio).to_integer();
                assert_eq!(
                    &integer_truth.multiplicity(&scaled),
                    count,
                    "sum {sum}, scale {scale}"
                );
            }
            let want = rational_truth
                .get(inst.target())
                .cloned()
                .unwrap_or_default();
            let got = integer_truth.multiplicity(&reduced.int_target().unwrap());
            assert_eq!(want, got, "scale {scale}");
        }
    }
}
