//! End-to-end acceptance suite. Each test covers one release criterion and
//! prints a single PASS line (visible with `--nocapture`); the test name
//! doubles as the pass/fail label in cargo's output.

use std::collections::BTreeMap;
use std::time::Instant;

use num::rational::Rational64;
use num::{BigInt, BigUint, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sumtape::detector::{self, DetectorConfig};
use sumtape::genfunc::{self, SparsePoly};
use sumtape::harness::{self, BenchTarget, GrowthConfig};
use sumtape::instance::{Backend, Instance, Variant};
use sumtape::polytape::{self, machines, HaltStatus};
use sumtape::spectral::{self, LazyProduct};
use sumtape::{oracle, tape};

const CAP: usize = genfunc::DEFAULT_TERM_CAP;

fn corpus_mixed_500() -> Vec<Instance> {
    harness::seeded_corpus(0xC2, 500, &[Variant::Natural, Variant::Integer], 14, 64)
}

fn corpus_zero_sum_200() -> Vec<Instance> {
    harness::seeded_corpus(0xC4, 200, &[Variant::ZeroSum], 12, 40)
}

#[test]
fn criterion_1_reference_instance_reproduced_exactly() {
    let inst = Instance::natural(vec![3, 4, 1], 8).unwrap();
    let expected: BTreeMap<BigInt, BigUint> = [(1, 1u32), (3, 1), (4, 2), (5, 1), (7, 1), (8, 1)]
        .into_iter()
        .map(|(s, c)| (BigInt::from(s), BigUint::from(c)))
        .collect();

    for backend in [Backend::TapeCount, Backend::GenFunc, Backend::SpectralFourier] {
        let map = harness::multiplicity_map(&inst, backend, CAP).unwrap();
        assert_eq!(map, expected, "backend {backend}");
    }
    println!("criterion 1: PASS - {{3,4,1}} multiplicity map identical across tape, genfunc, spectral");
}

#[test]
fn criterion_2_oracle_equivalence_over_500_instances() {
    let start = Instant::now();
    let corpus = corpus_mixed_500();
    assert_eq!(corpus.len(), 500);
    for (i, inst) in corpus.iter().enumerate() {
        harness::verify_agreement(inst, CAP)
            .unwrap_or_else(|e| panic!("instance {i} disagrees: {e}"));
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "corpus took {elapsed:.1}s, budget is 60s");
    println!(
        "criterion 2: PASS - 500 seeded instances agree across all exact backends in {elapsed:.1}s"
    );
}

#[test]
fn criterion_3_derivative_reads_are_exact() {
    // 200 random sparse polynomials of degree up to 200.
    let mut rng = ChaCha8Rng::seed_from_u64(0xC3);
    for _ in 0..200 {
        let terms: Vec<(u64, i64)> = (0..rng.gen_range(1..=40))
            .map(|_| {
                let c = rng.gen_range(1..=1_000_000i64);
                (
                    rng.gen_range(0..=200u64),
                    if rng.gen_bool(0.5) { c } else { -c },
                )
            })
            .collect();
        let poly = SparsePoly::from_terms(terms);
        let mut probes: Vec<u64> = poly.terms().map(|(e, _)| e.to_u64().unwrap()).collect();
        probes.extend((0..10).map(|_| rng.gen_range(0..=202u64)));
        for n in probes {
            assert_eq!(
                poly.derivative_read(n).unwrap(),
                poly.coefficient(&BigInt::from(n)),
                "degree-200 poly at n={n}"
            );
        }
    }

    // Every subset-sum polynomial from the criterion-2 corpus.
    for inst in corpus_mixed_500() {
        let poly = genfunc::expand(&inst).unwrap();
        if poly.has_negative_exponent() {
            // Derivative reads are defined for non-negative exponents only;
            // shift the polynomial into range first.
            let offset = -poly.min_exponent().unwrap().clone();
            let shifted = SparsePoly::from_terms(
                poly.terms().map(|(e, c)| (e + &offset, c.clone())),
            );
            check_poly_probes(&shifted, &mut rng);
        } else {
            check_poly_probes(&poly, &mut rng);
        }
    }
    println!("criterion 3: PASS - derivative reads equal coefficient lookups, exact big-int equality");
}

fn check_poly_probes(poly: &SparsePoly, rng: &mut ChaCha8Rng) {
    let exps: Vec<u64> = poly.terms().map(|(e, _)| e.to_u64().unwrap()).collect();
    let max = *exps.last().unwrap();
    let mut probes = vec![0, max, max + 1];
    probes.push(exps[rng.gen_range(0..exps.len())]);
    for n in probes {
        assert_eq!(
            poly.derivative_read(n).unwrap(),
            poly.coefficient(&BigInt::from(n)),
            "subset poly at n={n}"
        );
    }
}

#[test]
fn criterion_4_dc_integral_counts_zero_sums() {
    for (i, inst) in corpus_zero_sum_200().iter().enumerate() {
        let sig = LazyProduct::generate(inst).unwrap();
        let samples = sig.span() as u64 + 1;
        let dc = spectral::dc_integral(&sig, samples).unwrap();
        let truth = oracle::enumerate(inst).unwrap();
        let zero_count = truth.zero_sum_count().to_f64().unwrap();
        assert!(
            (dc - 1.0 - zero_count).abs() < 1e-6,
            "instance {i}: dc={dc}, zero-sum count={zero_count}"
        );
        assert_eq!(
            spectral::zsv_decision(dc),
            !truth.zero_sum_count().is_zero(),
            "instance {i} decision"
        );
    }
    println!("criterion 4: PASS - 200 zero-sum instances: DC integral = 1 + zero-sum count within 1e-6");
}

#[test]
fn criterion_5_correlation_reads_match_spectra() {
    for (i, inst) in corpus_zero_sum_200().iter().enumerate() {
        let sig = LazyProduct::generate(inst).unwrap();
        let spectrum = spectral::expand_spectrum(&sig).unwrap();
        let samples = sig.span() as u64 + 1;
        for (&b, weight) in spectrum.impulses() {
            let read = spectral::convolution_read(&sig, b, samples).unwrap();
            let expected = weight.to_f64().unwrap();
            assert!(
                (read.re - expected).abs() < 1e-6 && read.im.abs() < 1e-6,
                "instance {i}, frequency {b}: read {read}, expected {expected}"
            );
        }
    }

    // Constructed aliasing case: 8 samples fold the achievable sum 8 of
    // {3, 5} onto DC, so the unguarded correlation overcounts and the
    // guarded read refuses to run.
    let sig = LazyProduct::new(vec![3, 5]).unwrap();
    let folded = spectral::correlate(&sig, 0, 8).re;
    let truth = spectral::expand_spectrum(&sig)
        .unwrap()
        .weight(0)
        .to_f64()
        .unwrap();
    assert!((folded - 2.0).abs() < 1e-9);
    assert!((folded - truth).abs() > 0.5, "aliased read must disagree");
    assert!(matches!(
        spectral::convolution_read(&sig, 0, 8),
        Err(sumtape::Error::AliasRisk { .. })
    ));
    println!("criterion 5: PASS - correlation reads match spectra within 1e-6; aliasing case fails as constructed");
}

#[test]
fn criterion_6_detector_matches_oracle_across_scales() {
    // Noise-free fidelity at three scaling factors.
    let mut rng = ChaCha8Rng::seed_from_u64(0xC6);
    for gamma in [
        Rational64::new(1, 1),
        Rational64::new(1, 2),
        Rational64::new(1, 10),
    ] {
        for i in 0..100 {
            let n = rng.gen_range(1..=12);
            let inst = harness::random_instance(&mut rng, Variant::Natural, n, 8);
            let truth = oracle::enumerate(&inst).unwrap();
            let sig = LazyProduct::generate(&inst).unwrap();
            let cfg = DetectorConfig::for_signal(gamma, &sig).unwrap();
            let wave = detector::synthesize(&sig, &cfg).unwrap();

            let total: i64 = sig.factors().iter().sum();
            let queries = [0, 1, total / 2, total, total + 3];
            for b in queries {
                let report = detector::detect(&wave, b, &cfg);
                let expected = truth.decision(&BigInt::from(b));
                assert_eq!(
                    report.decision, expected,
                    "gamma {gamma}, instance {i}, sum {b}"
                );
            }
        }
    }

    // Noisy robustness: 1000 seeded trials at noise amplitude 0.2.
    let mut correct = 0u32;
    let trials = 1000u32;
    let mut rng = ChaCha8Rng::seed_from_u64(0x6C);
    for trial in 0..trials {
        let n = rng.gen_range(1..=8);
        let inst = harness::random_instance(&mut rng, Variant::Natural, n, 8);
        let truth = oracle::enumerate(&inst).unwrap();
        let sig = LazyProduct::generate(&inst).unwrap();
        let cfg = DetectorConfig::for_signal(Rational64::new(1, 1), &sig)
            .unwrap()
            .with_noise(0.2, trial as u64);
        let wave = detector::synthesize(&sig, &cfg).unwrap();
        let span = sig.max_sum() as i64;
        let b = rng.gen_range(1..=span.max(1));
        let report = detector::detect(&wave, b, &cfg);
        if report.decision == truth.decision(&BigInt::from(b)) {
            correct += 1;
        }
    }
    assert!(
        correct * 100 >= trials * 99,
        "only {correct}/{trials} noisy detections correct"
    );
    println!(
        "criterion 6: PASS - noise-free decisions match oracle at gamma 1, 1/2, 1/10; noisy trials {correct}/{trials} correct"
    );
}

#[test]
fn criterion_7_polynomial_tape_runs_machines_in_lockstep() {
    // The runner compares tape contents and head positions against the
    // reference array tape after every step and errors on any divergence,
    // so a completed run is itself the lockstep proof.
    let ones = vec![1u32; 120];
    let run = polytape::run_tm(&machines::unary_incrementer(), &ones, 1000).unwrap();
    assert_eq!(run.status, HaltStatus::Accepted);
    assert!(run.steps >= 100, "{} steps", run.steps);
    assert_eq!(run.tape.logical_symbols().len(), 121);

    let mut digits = vec![1u32]; // leading '0'
    digits.extend(vec![2u32; 120]); // 120 '1' digits
    let run = polytape::run_tm(&machines::binary_successor(), &digits, 1000).unwrap();
    assert_eq!(run.status, HaltStatus::Accepted);
    assert!(run.steps >= 100, "{} steps", run.steps);
    // "0111..1" + 1 = "1000..0": leading digit 1, then 120 zeros.
    let symbols = run.tape.logical_symbols();
    assert_eq!(symbols[&0], 2);
    assert!((1..=120).all(|i| symbols[&i] == 1));

    let run = polytape::run_tm(&machines::pingpong_scanner(), &[1, 2, 1, 2, 1], 150).unwrap();
    assert_eq!(run.status, HaltStatus::StepLimitExceeded);
    assert_eq!(run.steps, 150);
    assert_eq!(run.tape.logical_symbols(), run.reference.nonblank());

    println!("criterion 7: PASS - three machines ran 100+ steps with polynomial and array tapes in lockstep");
}

#[test]
fn criterion_8_growth_trends() {
    // Signal generation plus one evaluation across N = 1000..10000 stays at
    // most mildly superlinear; the fitted log-log slope must not exceed 2.3.
    let sizes: Vec<usize> = (1..=10).map(|k| k * 1000).collect();
    let cfg = GrowthConfig::new(sizes, 2_000_000_000, 5, 0xC8);
    let report = harness::run_growth(&cfg);
    let fit = report
        .fits
        .iter()
        .find(|f| f.target == BenchTarget::Generation)
        .expect("generation fit");
    assert!(
        fit.slope <= 2.3,
        "generation slope {:.3} exceeds 2.3",
        fit.slope
    );

    // The power-of-two family forces a full expansion: exactly 2^n stored
    // terms at every size.
    let sizes: Vec<usize> = (8..=20).collect();
    for (n, count) in harness::adversarial_term_counts(&sizes, CAP) {
        assert_eq!(count.unwrap(), 1usize << n, "adversarial n={n}");
    }
    println!(
        "criterion 8: PASS - generation slope {:.3} <= 2.3; adversarial expansion holds 2^n terms for n in 8..=20",
        fit.slope
    );
}

#[test]
fn criterion_9_packed_boolean_tape_is_fast() {
    // N = 200 values averaging 100 puts the tape total near 20000.
    let mut rng = ChaCha8Rng::seed_from_u64(0xC9);
    let values: Vec<i64> = (0..200).map(|_| rng.gen_range(50..=150)).collect();
    let total: i64 = values.iter().sum();
    assert!((15_000..=25_000).contains(&total));
    let inst = Instance::natural(values, total).unwrap();

    let counts = tape::run_count(&inst).unwrap();
    let bools = tape::run_bool(&inst).unwrap();
    assert!(tape::bool_matches_count(&bools, &counts));

    let count_time = {
        let start = Instant::now();
        std::hint::black_box(tape::run_count(&inst).unwrap());
        start.elapsed().as_secs_f64()
    };
    let bool_time = {
        let reps = 50;
        let start = Instant::now();
        for _ in 0..reps {
            std::hint::black_box(tape::run_bool(&inst).unwrap());
        }
        start.elapsed().as_secs_f64() / reps as f64
    };
    assert!(
        bool_time * 10.0 <= count_time,
        "boolean tape {bool_time:.6}s vs counting tape {count_time:.6}s: under 10x"
    );

    // Positivity agreement over the mixed corpus.
    for inst in corpus_mixed_500()
        .iter()
        .filter(|i| i.variant() == Variant::Natural)
    {
        let counts = tape::run_count(inst).unwrap();
        let bools = tape::run_bool(inst).unwrap();
        assert!(tape::bool_matches_count(&bools, &counts));
    }
    println!(
        "criterion 9: PASS - packed boolean tape agrees with counting tape and runs {:.0}x faster at S~20000",
        count_time / bool_time
    );
}
