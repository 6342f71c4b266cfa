//! Subcommand implementations behind the `progrand` binary.
//!
//! Each command is a pure function of its [`Invocation`], the resolved
//! generator configuration and the sample count; it returns the text to
//! print and the files to write. [`execute`] then writes those files plus a
//! [`RunManifest`] into the output directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, ensure, Context, Result};
use serde::Serialize;

use crate::bits::BitSeq;
use crate::engine::{run, theoretical_p1, GeneratorConfig};
use crate::gf2::Gf2Poly;
use crate::lfsr::{period, MAX_PERIOD_DEGREE};
use crate::manifest::{write_atomic, BitFormat, Invocation, RunManifest, MANIFEST_FILE};
use crate::stats::{
    binary_auto_report, binary_cross_report, default_max_lag, ramp_phase_analysis, BinarySequence,
    CorrelationReport, QuadraticFit, StatsError,
};
use crate::taps::capacity;
use crate::threshold::{max_threshold, ThresholdSchedule};

/// Environment variable naming the default output root.
pub const OUT_DIR_ENV: &str = "PROGRAND_OUT_DIR";

/// Text for stdout plus named output files.
#[derive(Debug, Default)]
pub struct Outcome {
    pub stdout: String,
    pub files: Vec<(String, Vec<u8>)>,
}

impl Outcome {
    fn file(&mut self, name: impl Into<String>, contents: impl Into<Vec<u8>>) {
        self.files.push((name.into(), contents.into()));
    }
}

/// Runs an invocation and, when `out_dir` is given, writes its files and a
/// manifest there.
pub fn execute(
    command: Invocation,
    config: Option<GeneratorConfig>,
    samples: Option<usize>,
    out_dir: Option<&Path>,
) -> Result<Outcome> {
    let mut outcome = dispatch(&command, config.as_ref(), samples)?;
    if let Some(dir) = out_dir {
        for (name, contents) in &outcome.files {
            write_atomic(&dir.join(name), contents)?;
        }
        let manifest = RunManifest {
            command,
            config,
            samples,
            outputs: outcome.files.iter().map(|(n, _)| n.clone()).collect(),
        };
        write_atomic(&dir.join(MANIFEST_FILE), manifest.to_json().as_bytes())?;
        let _ = writeln!(
            outcome.stdout,
            "wrote {} files to {}",
            outcome.files.len() + 1,
            dir.display()
        );
    }
    Ok(outcome)
}

/// Re-executes a manifest.
pub fn replay(manifest: &RunManifest, out_dir: Option<&Path>) -> Result<Outcome> {
    execute(
        manifest.command.clone(),
        manifest.config.clone(),
        manifest.samples,
        out_dir,
    )
}

fn dispatch(
    command: &Invocation,
    config: Option<&GeneratorConfig>,
    samples: Option<usize>,
) -> Result<Outcome> {
    let need_config =
        || config.ok_or_else(|| anyhow!("this command requires a generator configuration"));
    let need_samples = || {
        let n = samples.ok_or_else(|| anyhow!("this command requires a sample count"))?;
        ensure!(n >= 1, "sample count must be at least 1");
        Ok::<usize, anyhow::Error>(n)
    };
    match command {
        Invocation::CheckPoly { polynomial } => check_poly(polynomial),
        Invocation::Capacity { n, k, m } => capacity_cmd(*n, *k, *m),
        Invocation::Generate { format } => generate(need_config()?, need_samples()?, *format),
        Invocation::Sweep { thresholds } => sweep(need_config()?, need_samples()?, thresholds),
        Invocation::Dynamic { stream } => dynamic(need_config()?, need_samples()?, *stream),
        Invocation::Correlate {
            files,
            max_lag,
            packed_len,
        } => correlate(files, *max_lag, *packed_len),
    }
}

#[derive(Serialize)]
struct PolyReport {
    polynomial: String,
    hex: String,
    degree: u32,
    irreducible: bool,
    primitive: bool,
    period: Option<u64>,
}

fn check_poly(text: &str) -> Result<Outcome> {
    let poly: Gf2Poly = text.parse()?;
    let report = PolyReport {
        polynomial: poly.to_string(),
        hex: poly.to_hex(),
        degree: poly.degree(),
        irreducible: poly.is_irreducible()?,
        primitive: poly.is_primitive()?,
        period: if poly.degree() <= MAX_PERIOD_DEGREE {
            Some(period(poly)?)
        } else {
            None
        },
    };
    let mut out = Outcome::default();
    let _ = writeln!(
        out.stdout,
        "polynomial:  {} ({})",
        report.polynomial, report.hex
    );
    let _ = writeln!(out.stdout, "degree:      {}", report.degree);
    let _ = writeln!(out.stdout, "irreducible: {}", report.irreducible);
    let _ = writeln!(out.stdout, "primitive:   {}", report.primitive);
    match report.period {
        Some(p) => {
            let _ = writeln!(out.stdout, "period:      {p}");
        }
        None => {
            let _ = writeln!(
                out.stdout,
                "period:      not enumerated (degree > {MAX_PERIOD_DEGREE})"
            );
        }
    }
    out.file("check_poly.json", json_bytes(&report));
    Ok(out)
}

fn capacity_cmd(n: u32, k: u32, m: u32) -> Result<Outcome> {
    let c = capacity(n, k, m)?;
    let mut out = Outcome::default();
    let _ = writeln!(out.stdout, "{c}");
    #[derive(Serialize)]
    struct CapacityReport {
        n: u32,
        k: u32,
        m: u32,
        capacity: String,
    }
    out.file(
        "capacity.json",
        json_bytes(&CapacityReport {
            n,
            k,
            m,
            capacity: c.to_string(),
        }),
    );
    Ok(out)
}

fn generate(config: &GeneratorConfig, samples: usize, format: BitFormat) -> Result<Outcome> {
    let output = run(config, samples).context("invalid generator configuration")?;
    let mut out = Outcome::default();
    for (i, bits) in output.bits.iter().enumerate() {
        let name = format!("stream_{i}.{}", format.extension());
        let contents = match format {
            BitFormat::Packed => bits.to_packed_bytes(),
            BitFormat::Ascii => bits.to_ascii_lines().into_bytes(),
        };
        let _ = writeln!(
            out.stdout,
            "{name}: {} ones / {} samples ({:.6})",
            bits.count_ones(),
            samples,
            bits.count_ones() as f64 / samples as f64
        );
        out.file(name, contents);
    }
    out.file("thresholds.csv", output.threshold_csv());
    Ok(out)
}

fn sweep(config: &GeneratorConfig, samples: usize, thresholds: &[u32]) -> Result<Outcome> {
    ensure!(!thresholds.is_empty(), "threshold list is empty");
    ensure!(
        matches!(config.schedule, ThresholdSchedule::Fixed { .. }),
        "sweep requires a fixed-threshold base configuration"
    );
    let mut csv = String::from("threshold,empirical_p1,theoretical_p1\n");
    for &t in thresholds {
        let c = config
            .clone()
            .with_schedule(ThresholdSchedule::Fixed { value: t });
        let output = run(&c, samples).with_context(|| format!("threshold {t}"))?;
        let ones: u64 = output.bits.iter().map(BitSeq::count_ones).sum();
        let empirical = ones as f64 / (samples * output.bits.len()) as f64;
        let theoretical = theoretical_p1(t as u64, config.m)?;
        let _ = writeln!(csv, "{t},{empirical},{theoretical}");
    }
    let mut out = Outcome {
        stdout: csv.clone(),
        ..Outcome::default()
    };
    out.file("sweep.csv", csv);
    Ok(out)
}

#[derive(Serialize)]
struct DynamicReport {
    stream: usize,
    samples: usize,
    saturation_step: Option<usize>,
    window_end: usize,
    fit: QuadraticFit,
    derivative: Derivative,
    ones_after_window: u64,
}

#[derive(Serialize)]
struct Derivative {
    slope: f64,
    intercept: f64,
}

fn dynamic(config: &GeneratorConfig, samples: usize, stream: usize) -> Result<Outcome> {
    ensure!(
        !matches!(config.schedule, ThresholdSchedule::Fixed { .. }),
        "dynamic requires a counter_ramp or custom schedule"
    );
    ensure!(
        stream < config.streams.len(),
        "stream index {stream} out of range (config has {} streams)",
        config.streams.len()
    );
    let output = run(config, samples).context("invalid generator configuration")?;
    let analysis = ramp_phase_analysis(
        &output.bits[stream],
        &output.thresholds,
        max_threshold(config.m),
    )
    .map_err(|e| match e {
        StatsError::NoOnes => {
            anyhow!("stream {stream} emitted no ones (schedule starts saturated?): {e}")
        }
        other => anyhow!(other),
    })?;
    let report = DynamicReport {
        stream,
        samples,
        saturation_step: analysis.saturation_step,
        window_end: analysis.window_end,
        fit: analysis.fit,
        derivative: Derivative {
            slope: analysis.derivative_slope,
            intercept: analysis.derivative_intercept,
        },
        ones_after_window: analysis.ones_after_window,
    };
    let mut out = Outcome::default();
    let f = &analysis.fit;
    let _ = writeln!(
        out.stdout,
        "fit over steps 0..={}: cc = {:.6} t^2 + {:.6} t + {:.6} (r^2 = {:.6})",
        analysis.window_end, f.c2, f.c1, f.c0, f.r_squared
    );
    let _ = writeln!(
        out.stdout,
        "derivative: dcc/dt = {:.6} t + {:.6}",
        analysis.derivative_slope, analysis.derivative_intercept
    );
    let _ = writeln!(
        out.stdout,
        "ones after window: {}",
        analysis.ones_after_window
    );
    out.file("cumulative.csv", analysis.curve.to_csv());
    out.file("fit.json", json_bytes(&report));
    out.file("thresholds.csv", output.threshold_csv());
    Ok(out)
}

/// Loads a bit file: `.txt` as one bit per line, anything else as packed
/// bytes (optionally truncated to `packed_len` bits).
pub fn load_bits(path: &Path, packed_len: Option<usize>) -> Result<BitSeq> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let ascii = path.extension().is_some_and(|e| e == "txt");
    let seq = if ascii {
        BitSeq::from_ascii_lines(std::str::from_utf8(&bytes)?)
    } else {
        BitSeq::from_packed_bytes(&bytes, packed_len)
    };
    seq.with_context(|| format!("decoding {}", path.display()))
}

#[derive(Serialize)]
struct CrossEntry {
    a: usize,
    b: usize,
    report: CorrelationReport,
}

#[derive(Serialize)]
struct AutoEntry {
    file: usize,
    report: CorrelationReport,
}

#[derive(Serialize)]
struct CorrelateReport {
    files: Vec<String>,
    samples: usize,
    max_lag: usize,
    cross: Vec<CrossEntry>,
    auto: Vec<AutoEntry>,
}

fn correlate(
    files: &[PathBuf],
    max_lag: Option<usize>,
    packed_len: Option<usize>,
) -> Result<Outcome> {
    ensure!(!files.is_empty(), "at least one bit file is required");
    let seqs = files
        .iter()
        .map(|p| load_bits(p, packed_len))
        .collect::<Result<Vec<_>>>()?;
    let len = seqs[0].len();
    for (p, s) in files.iter().zip(&seqs) {
        ensure!(
            s.len() == len,
            "{} has {} samples but {} has {len}; lengths must match",
            p.display(),
            s.len(),
            files[0].display()
        );
    }
    ensure!(
        len >= 3,
        "sequences of length {len} are too short to correlate"
    );
    let max_lag = max_lag.unwrap_or_else(|| default_max_lag(len)).max(1);
    ensure!(
        max_lag <= len - 2,
        "max lag {max_lag} exceeds N - 2 = {}",
        len - 2
    );
    let prepared: Vec<BinarySequence> = seqs.iter().map(BinarySequence::new).collect();
    for (p, s) in files.iter().zip(&prepared) {
        if s.ones() == 0 || s.ones() == len as u64 {
            bail!(
                "{}: {}",
                p.display(),
                StatsError::ZeroVariance { operand: "file" }
            );
        }
    }

    let mut report = CorrelateReport {
        files: files.iter().map(|p| p.display().to_string()).collect(),
        samples: len,
        max_lag,
        cross: vec![],
        auto: vec![],
    };
    let mut out = Outcome::default();
    let mut summary = String::from("kind,a,b,max_abs_lag,max_abs_value\n");
    for i in 0..prepared.len() {
        for j in i + 1..prepared.len() {
            let r = binary_cross_report(&prepared[i], &prepared[j], max_lag)?;
            let _ = writeln!(
                summary,
                "cross,{i},{j},{},{}",
                r.max_abs_lag, r.max_abs_value
            );
            out.file(format!("xcorr_{i}_{j}.csv"), r.to_csv());
            report.cross.push(CrossEntry {
                a: i,
                b: j,
                report: r,
            });
        }
    }
    for (i, s) in prepared.iter().enumerate() {
        let r = binary_auto_report(s, max_lag)?;
        let _ = writeln!(
            summary,
            "auto,{i},{i},{},{}",
            r.max_abs_lag, r.max_abs_value
        );
        out.file(format!("acorr_{i}.csv"), r.to_csv());
        report.auto.push(AutoEntry { file: i, report: r });
    }
    out.stdout = summary.clone();
    out.file("correlation_summary.csv", summary);
    out.file("correlation.json", json_bytes(&report));
    Ok(out)
}

fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s.into_bytes()
}
