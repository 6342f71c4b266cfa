use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use progrand::cli::{execute, replay, OUT_DIR_ENV};
use progrand::engine::GeneratorConfig;
use progrand::manifest::{BitFormat, Invocation, RunManifest};
use progrand::threshold::ThresholdSchedule;

const DEFAULT_OUT_DIR: &str = "progrand-out";

#[derive(Parser)]
#[command(
    name = "progrand",
    version,
    about = "Multi-stream LFSR bit generator with programmable statistics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutArgs {
    /// Output directory
    #[arg(long, value_name = "DIR", env = OUT_DIR_ENV)]
    out_dir: Option<PathBuf>,
}

impl OutArgs {
    /// Flag or environment, then `fallback`.
    fn resolve(&self, fallback: Option<&str>) -> Option<PathBuf> {
        self.out_dir.clone().or_else(|| fallback.map(PathBuf::from))
    }
}

#[derive(Args)]
struct GenArgs {
    /// JSON generator configuration; defaults to the built-in 32-stage setup
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Overrides the configured LFSR seed
    #[arg(long)]
    seed: Option<u64>,
}

impl GenArgs {
    fn load(&self) -> Result<GeneratorConfig> {
        let config = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("invalid config {}", path.display()))?
            }
            None => GeneratorConfig::default_32(),
        };
        let config = match self.seed {
            Some(seed) => config.with_seed(seed),
            None => config,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Packed,
    Ascii,
}

#[derive(Subcommand)]
enum Command {
    /// Report degree, irreducibility, primitivity and period of a polynomial
    CheckPoly {
        /// Caret form ("x^3+x^2+1") or hex coefficient mask ("0xd")
        polynomial: String,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Generate per-stream bit files and the threshold trace
    Generate {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(short = 'N', long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, value_enum, default_value = "packed")]
        format: FormatArg,
        /// Replaces the schedule with a fixed threshold
        #[arg(long)]
        threshold: Option<u32>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Empirical vs theoretical probability of a 1 across fixed thresholds
    Sweep {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(short = 'N', long, default_value_t = 1_000_000)]
        samples: usize,
        /// Thresholds to test, comma separated or repeated
        #[arg(long, required = true, value_delimiter = ',', num_args = 1..)]
        threshold: Vec<u32>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Cumulative-count curve and ramp-phase quadratic fit under a dynamic schedule
    Dynamic {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(short = 'N', long, default_value_t = 2048)]
        samples: usize,
        /// Runs a counter ramp from this value instead of the configured schedule;
        /// without a config the ramp starts at 0
        #[arg(long)]
        threshold: Option<u32>,
        /// Stream to analyze
        #[arg(long, default_value_t = 0)]
        stream: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Pairwise cross-correlation and per-file auto-correlation peaks
    Correlate {
        /// Bit files: *.txt holds one bit per line, anything else is packed
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Largest lag scanned; defaults to min(1000, N/10)
        #[arg(long)]
        max_lag: Option<usize>,
        /// Bits to read from packed files (defaults to 8 per byte)
        #[arg(short = 'N', long)]
        samples: Option<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Number of non-shift-equivalent m-bit streams: floor(C(n-1, k-1) / m)
    Capacity {
        n: u32,
        k: u32,
        m: u32,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Re-run the command recorded in a manifest
    Replay {
        manifest: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(stdout) => {
            print!("{stdout}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<String> {
    let outcome = match command {
        Command::CheckPoly { polynomial, out } => execute(
            Invocation::CheckPoly { polynomial },
            None,
            None,
            out.resolve(None).as_deref(),
        )?,
        Command::Capacity { n, k, m, out } => execute(
            Invocation::Capacity { n, k, m },
            None,
            None,
            out.resolve(None).as_deref(),
        )?,
        Command::Generate {
            gen,
            samples,
            format,
            threshold,
            out,
        } => {
            let mut config = gen.load()?;
            if let Some(value) = threshold {
                config = config.with_schedule(ThresholdSchedule::Fixed { value });
            }
            let format = match format {
                FormatArg::Packed => BitFormat::Packed,
                FormatArg::Ascii => BitFormat::Ascii,
            };
            execute(
                Invocation::Generate { format },
                Some(config),
                Some(samples),
                out.resolve(Some(DEFAULT_OUT_DIR)).as_deref(),
            )?
        }
        Command::Sweep {
            gen,
            samples,
            threshold,
            out,
        } => execute(
            Invocation::Sweep {
                thresholds: threshold,
            },
            Some(gen.load()?),
            Some(samples),
            out.resolve(Some(DEFAULT_OUT_DIR)).as_deref(),
        )?,
        Command::Dynamic {
            gen,
            samples,
            threshold,
            stream,
            out,
        } => {
            let mut config = gen.load()?;
            if gen.config.is_none() || threshold.is_some() {
                config = config.with_schedule(ThresholdSchedule::CounterRamp {
                    initial: threshold.unwrap_or(0),
                });
                config.validate()?;
            }
            execute(
                Invocation::Dynamic { stream },
                Some(config),
                Some(samples),
                out.resolve(Some(DEFAULT_OUT_DIR)).as_deref(),
            )?
        }
        Command::Correlate {
            files,
            max_lag,
            samples,
            out,
        } => execute(
            Invocation::Correlate {
                files,
                max_lag,
                packed_len: samples,
            },
            None,
            None,
            out.resolve(Some(DEFAULT_OUT_DIR)).as_deref(),
        )?,
        Command::Replay { manifest, out } => {
            let m = RunManifest::load(&manifest)?;
            let dir = out
                .resolve(None)
                .unwrap_or_else(|| manifest.parent().unwrap_or(Path::new(".")).to_path_buf());
            replay(&m, Some(&dir))?
        }
    };
    Ok(outcome.stdout)
}
