//! `sumtape`: solve subset-sum instances with interchangeable backends,
//! cross-check them against brute force, measure runtime growth, run
//! polynomial-tape machines, and exercise the sampled-signal detector.
//!
//! All output is line-oriented JSON. Exit codes: 0 for a positive result
//! (or full agreement), 1 for a negative decision (or a mismatch), 2 for
//! errors, which land on stderr as `{"error": ...}`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value as JsonValue};

use sumtape::detector::{self, DetectorConfig};
use sumtape::genfunc;
use sumtape::harness::{self, BenchTarget, GrowthConfig};
use sumtape::instance::{Answer, Backend, Instance, Variant};
use sumtape::polytape::{self, HaltStatus, TmDescription};
use sumtape::spectral::{self, LazyProduct};
use sumtape::{oracle, tape, BigInt, BigUint, Rational64};

#[derive(Parser)]
#[command(name = "sumtape", version, about = "Multi-backend subset-sum engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance with a chosen backend.
    Solve(SolveArgs),
    /// Run all exact backends against the enumeration oracle.
    Compare(CompareArgs),
    /// Measure runtime growth over instance size.
    Bench(BenchArgs),
    /// Run a Turing machine on the polynomial tape (lockstep-checked).
    TmRun(TmRunArgs),
    /// Synthesize the scaled signal and detect one sum.
    Detect(DetectArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file (JSON).
    instance: PathBuf,
    #[arg(long, value_parser = parse_backend)]
    backend: Backend,
    /// Override the instance's target.
    #[arg(long)]
    target: Option<String>,
    /// Sample count for the correlation backends (default: span + 1).
    #[arg(long)]
    samples: Option<u64>,
    /// Decision margin for the floating-point backends: a correlation level
    /// must exceed this to count as a hit.
    #[arg(long, default_value_t = 0.5)]
    tolerance: f64,
    /// Term cap for expanding backends.
    #[arg(long, default_value_t = genfunc::DEFAULT_TERM_CAP)]
    cap: usize,
    /// Write the backend's full map (tape cells, polynomial terms, or
    /// spectrum impulses) to this path.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    detector: DetectorOpts,
}

#[derive(Args)]
struct CompareArgs {
    /// Instance file; omit to use the seeded random corpus.
    instance: Option<PathBuf>,
    /// Number of random instances to draw.
    #[arg(long, default_value_t = 200)]
    random: usize,
    #[arg(long, default_value_t = 12)]
    max_n: usize,
    #[arg(long, default_value_t = 64)]
    max_value: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated variants to draw from.
    #[arg(long, default_value = "natural,integer", value_delimiter = ',')]
    variants: Vec<String>,
    #[arg(long, default_value_t = genfunc::DEFAULT_TERM_CAP)]
    cap: usize,
}

#[derive(Args)]
struct BenchArgs {
    /// Sizes as start:end:step or a comma list (e.g. 1000:10000:1000).
    #[arg(long, default_value = "1000:10000:1000")]
    sizes: String,
    #[arg(long, default_value_t = 2_000_000_000)]
    max_value: u64,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated targets: generation, tape-count, tape-bool,
    /// genfunc-expand, convolution-read.
    #[arg(long, default_value = "generation", value_delimiter = ',')]
    targets: Vec<String>,
    #[arg(long, default_value_t = genfunc::DEFAULT_TERM_CAP)]
    cap: usize,
    /// Expand the power-of-two family and report term counts instead.
    #[arg(long)]
    adversarial: bool,
    /// Write the full report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TmRunArgs {
    /// Machine description (JSON).
    machine: PathBuf,
    /// Comma-separated input symbols, e.g. 1,1,1.
    #[arg(long, value_delimiter = ',')]
    input: Vec<u32>,
    #[arg(long, default_value_t = 10_000)]
    max_steps: usize,
    /// Emit one JSON line per executed step.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct DetectArgs {
    instance: PathBuf,
    /// Sum to listen for.
    #[arg(long, allow_hyphen_values = true)]
    target: i64,
    /// Export the synthesized waveform (SSWF binary).
    #[arg(long)]
    export: Option<PathBuf>,
    #[command(flatten)]
    detector: DetectorOpts,
}

#[derive(Args)]
struct DetectorOpts {
    /// Frequency scaling factor, as an integer or p/q fraction.
    #[arg(long, default_value = "1")]
    gamma: String,
    /// Passband half-width; defaults to half the grid spacing.
    #[arg(long)]
    epsilon: Option<String>,
    /// Samples per unit time; defaults to an alias-safe power of two.
    #[arg(long)]
    rate: Option<u32>,
    /// Observation window, as an integer or p/q fraction.
    #[arg(long)]
    duration: Option<String>,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
}

fn main() {
    match run() {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("{}", json!({ "error": format!("{err:#}") }));
            std::process::exit(2);
        }
    }
}

fn run() -> Result<i32> {
    match Cli::parse().command {
        Command::Solve(args) => solve(args),
        Command::Compare(args) => compare(args),
        Command::Bench(args) => bench(args),
        Command::TmRun(args) => tm_run(args),
        Command::Detect(args) => detect(args),
    }
}

fn parse_backend(s: &str) -> Result<Backend, String> {
    s.parse()
}

fn parse_ratio(s: &str) -> Result<Rational64> {
    let (numer, denom) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let numer: i64 = numer.parse().with_context(|| format!("bad ratio {s:?}"))?;
    let denom: i64 = denom.parse().with_context(|| format!("bad ratio {s:?}"))?;
    if denom == 0 {
        bail!("ratio {s:?} has a zero denominator");
    }
    Ok(Rational64::new(numer, denom))
}

fn parse_sizes(spec: &str) -> Result<Vec<usize>> {
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            bail!("size range must be start:end:step, got {spec:?}");
        }
        let start: usize = parts[0].parse()?;
        let end: usize = parts[1].parse()?;
        let step: usize = parts[2].parse()?;
        if step == 0 || start == 0 || end < start {
            bail!("degenerate size range {spec:?}");
        }
        Ok((start..=end).step_by(step).collect())
    } else {
        spec.split(',')
            .map(|p| Ok(p.trim().parse::<usize>()?))
            .collect()
    }
}

fn load_instance(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading instance {}", path.display()))?;
    let inst: Instance =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(inst)
}

fn write_json(path: &Path, value: &JsonValue) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut writer = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut writer, value)?;
    writer.write_all(b"\n")?;
    Ok(())
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

fn solve(args: SolveArgs) -> Result<i32> {
    let mut inst = load_instance(&args.instance)?;
    let mut scaled_by: Option<BigInt> = None;
    if inst.variant() == Variant::Rational {
        let (reduced, scale) = inst.reduce_rational()?;
        inst = reduced;
        scaled_by = Some(scale);
    }

    let mut target = match &args.target {
        Some(text) => text
            .parse::<BigInt>()
            .map_err(|_| anyhow!("target {text:?} is not an integer"))?,
        None => inst.int_target()?,
    };
    if let Some(scale) = &scaled_by {
        if args.target.is_some() {
            target *= scale;
        }
    }

    let start = Instant::now();
    let (answer, map) = run_backend(&args, &inst, &target)?;
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;

    let mut out = json!({
        "decision": answer.decision,
        "backend": answer.backend.name(),
        "elapsed_ms": elapsed_ms,
    });
    if let Some(m) = &answer.multiplicity {
        out["multiplicity"] = json!(m.to_string());
    }
    if let Some(scale) = &scaled_by {
        out["scaled_by"] = json!(scale.to_string());
    }

    if let Some(path) = &args.out {
        let artifact = map.unwrap_or_else(|| out.clone());
        write_json(path, &artifact)?;
    }
    println!("{out}");
    Ok(if answer.decision { 0 } else { 1 })
}

/// Runs the chosen backend; also returns its full map when it has one.
fn run_backend(
    args: &SolveArgs,
    inst: &Instance,
    target: &BigInt,
) -> Result<(Answer, Option<JsonValue>)> {
    let answer = match args.backend {
        Backend::TapeCount => {
            let tape = tape::run_count(inst)?;
            let answer = tape.decide(target);
            return Ok((answer, Some(harness::tape_json(&tape))));
        }
        Backend::TapeBool => tape::run_bool(inst)?.decide(target),
        Backend::GenFunc => {
            let poly = genfunc::expand_with_cap(inst, args.cap)?;
            let m = genfunc::subset_multiplicity(&poly, target);
            let answer = Answer::counted(
                Backend::GenFunc,
                m.to_biguint().unwrap_or_default(),
            );
            return Ok((answer, Some(poly.to_json_map())));
        }
        Backend::SpectralFourier => {
            let sig = LazyProduct::generate(inst)?;
            let spectrum = spectral::expand_spectrum_with_cap(&sig, args.cap)?;
            let b = to_frequency(target)?;
            let answer = Answer::counted(Backend::SpectralFourier, spectrum.fourier_read(b));
            return Ok((answer, Some(spectrum.to_json_map())));
        }
        Backend::SpectralConv => {
            let sig = LazyProduct::generate(inst)?;
            let b = to_frequency(target)?;
            let samples = args.samples.unwrap_or(sig.span() as u64 + 1);
            let read = spectral::convolution_read(&sig, b, samples)?;
            let level = if b == 0 { read.re - 1.0 } else { read.re };
            Answer {
                decision: level > args.tolerance,
                multiplicity: Some(BigUint::from(level.round().max(0.0) as u64)),
                backend: Backend::SpectralConv,
            }
        }
        Backend::DcIntegral => {
            let sig = LazyProduct::generate(inst)?;
            let samples = args.samples.unwrap_or(sig.span() as u64 + 1);
            let value = spectral::dc_integral(&sig, samples)?;
            Answer {
                decision: value - 1.0 > args.tolerance,
                multiplicity: Some(BigUint::from((value - 1.0).round().max(0.0) as u64)),
                backend: Backend::DcIntegral,
            }
        }
        Backend::Detector => {
            let sig = LazyProduct::generate(inst)?;
            let cfg = args.detector.build(&sig)?;
            let wave = detector::synthesize(&sig, &cfg)?;
            let report = detector::detect(&wave, to_frequency(target)?, &cfg);
            Answer::decided(Backend::Detector, report.decision)
        }
        Backend::Oracle => oracle::enumerate(inst)?.answer(target),
    };
    Ok((answer, None))
}

fn to_frequency(target: &BigInt) -> Result<i64> {
    i64::try_from(target.clone())
        .map_err(|_| anyhow!("target {target} does not fit the frequency range"))
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

fn compare(args: CompareArgs) -> Result<i32> {
    let instances = match &args.instance {
        Some(path) => vec![load_instance(path)?],
        None => {
            let variants = args
                .variants
                .iter()
                .map(|v| v.parse::<Variant>().map_err(|e| anyhow!(e)))
                .collect::<Result<Vec<_>>>()?;
            harness::seeded_corpus(args.seed, args.random, &variants, args.max_n, args.max_value)
        }
    };

    let mut mismatched = 0usize;
    for (i, inst) in instances.iter().enumerate() {
        let checks = harness::compare_instance(inst, args.cap)?;
        let agreed = checks.iter().all(|c| c.agreed);
        let mut line = json!({
            "instance": i,
            "variant": inst.variant().name(),
            "n": inst.len(),
            "agreed": agreed,
            "backends": checks
                .iter()
                .map(|c| (c.backend.name().to_string(), json!(c.agreed)))
                .collect::<serde_json::Map<_, _>>(),
        });
        if let Some(check) = checks.iter().find(|c| c.mismatch.is_some()) {
            let m = check.mismatch.as_ref().unwrap();
            line["mismatch"] = json!({
                "backend": check.backend.name(),
                "sum": m.sum.to_string(),
                "expected": m.expected.to_string(),
                "got": m.got.to_string(),
            });
        }
        println!("{line}");
        if !agreed {
            mismatched += 1;
        }
    }
    println!(
        "{}",
        json!({
            "instances": instances.len(),
            "agreed": instances.len() - mismatched,
            "mismatched": mismatched,
            "seed": args.seed,
        })
    );
    Ok(if mismatched == 0 { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

fn bench(args: BenchArgs) -> Result<i32> {
    if args.adversarial {
        let sizes = if args.sizes == "1000:10000:1000" {
            (8..=20).collect()
        } else {
            parse_sizes(&args.sizes)?
        };
        let mut report = Vec::new();
        for (n, count) in harness::adversarial_term_counts(&sizes, args.cap) {
            let line = match count {
                Ok(terms) => json!({
                    "n": n,
                    "terms": terms,
                    "expected": 1u64 << n,
                    "exact": terms as u64 == 1u64 << n,
                }),
                Err(e) => json!({ "n": n, "skipped": e.to_string() }),
            };
            println!("{line}");
            report.push(line);
        }
        if let Some(path) = &args.out {
            write_json(path, &JsonValue::Array(report))?;
        }
        return Ok(0);
    }

    let targets = args
        .targets
        .iter()
        .map(|t| t.parse::<BenchTarget>().map_err(|e| anyhow!(e)))
        .collect::<Result<Vec<_>>>()?;
    let mut cfg = GrowthConfig::new(parse_sizes(&args.sizes)?, args.max_value, args.reps, args.seed)
        .with_targets(targets);
    cfg.term_cap = args.cap;

    let report = harness::run_growth(&cfg);
    for row in &report.rows {
        println!("{}", serde_json::to_value(row)?);
    }
    for fit in &report.fits {
        println!("{}", serde_json::to_value(fit)?);
    }
    if let Some(path) = &args.out {
        write_json(path, &serde_json::to_value(&report)?)?;
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// tm-run
// ---------------------------------------------------------------------------

fn tm_run(args: TmRunArgs) -> Result<i32> {
    let text = std::fs::read_to_string(&args.machine)
        .with_context(|| format!("reading machine {}", args.machine.display()))?;
    let machine: TmDescription = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", args.machine.display()))?;

    let run = polytape::run_tm(&machine, &args.input, args.max_steps)?;
    if args.trace {
        for step in &run.trace {
            println!(
                "{}",
                json!({
                    "step": step.step,
                    "state": step.state,
                    "head": step.head,
                    "read": step.read,
                    "write": step.write,
                    "move": match step.mv { polytape::Move::Left => "L", polytape::Move::Right => "R" },
                })
            );
        }
    }
    let status = match run.status {
        HaltStatus::Accepted => "accepted",
        HaltStatus::Rejected => "rejected",
        HaltStatus::StepLimitExceeded => "step-limit-exceeded",
    };
    println!(
        "{}",
        json!({
            "status": status,
            "steps": run.steps,
            "head": run.logical_head(),
            "cells": run
                .tape
                .logical_symbols()
                .into_iter()
                .map(|(i, s)| (i.to_string(), json!(s)))
                .collect::<serde_json::Map<_, _>>(),
        })
    );
    Ok(match run.status {
        HaltStatus::Accepted => 0,
        HaltStatus::Rejected => 1,
        HaltStatus::StepLimitExceeded => 2,
    })
}

// ---------------------------------------------------------------------------
// detect
// ---------------------------------------------------------------------------

fn detect(args: DetectArgs) -> Result<i32> {
    let mut inst = load_instance(&args.instance)?;
    if inst.variant() == Variant::Rational {
        inst = inst.reduce_rational()?.0;
    }
    let sig = LazyProduct::generate(&inst)?;
    let cfg = args.detector.build(&sig)?;
    let wave = detector::synthesize(&sig, &cfg)?;
    if let Some(path) = &args.export {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        wave.write_to(BufWriter::new(file))?;
    }
    let report = detector::detect(&wave, args.target, &cfg);
    println!(
        "{}",
        json!({
            "queried_sum": report.queried_sum,
            "amplitude": report.measured_amplitude,
            "threshold": report.threshold,
            "decision": report.decision,
            "gamma": cfg.gamma.to_string(),
            "epsilon": cfg.epsilon.to_string(),
            "rate": cfg.sample_rate,
            "duration": cfg.duration.to_string(),
            "samples": cfg.samples(),
            "noise": cfg.noise_amplitude,
            "seed": cfg.seed,
        })
    );
    Ok(if report.decision { 0 } else { 1 })
}

impl DetectorOpts {
    fn build(&self, sig: &LazyProduct) -> Result<DetectorConfig> {
        let gamma = parse_ratio(&self.gamma)?;
        let mut cfg = DetectorConfig::for_signal(gamma, sig)?;
        if let Some(rate) = self.rate {
            cfg.sample_rate = rate;
        }
        if let Some(duration) = &self.duration {
            cfg.duration = parse_ratio(duration)?;
        }
        if let Some(epsilon) = &self.epsilon {
            cfg.epsilon = parse_ratio(epsilon)?;
        }
        cfg.threshold = self.threshold;
        cfg.noise_amplitude = self.noise;
        cfg.seed = self.seed;
        cfg.validate()?;
        Ok(cfg)
    }
}
