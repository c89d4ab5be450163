//! `handtri`: triangle features from hand/face detection streams.
//!
//! Exit codes: 0 success, 1 usage error, 2 manifest error, 3 some videos
//! failed.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use handtri::batch::{bench, run_batch, BatchError, BatchOptions};
use handtri::manifest::Manifest;
use handtri::synth::{write_corpus, CorpusError, CorpusSpec};
use handtri::{FigureSpec, SamplerConfig};

const USAGE: u8 = 1;
const MANIFEST: u8 = 2;
const PARTIAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "handtri",
    version,
    about = "Triangle features and figures from hand/face detections"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract features (and optionally figures) for every manifest entry.
    Extract {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Write `{video_id}/fig_{k:02}.png` for each non-padded frame.
        #[arg(long)]
        emit_figures: bool,
        #[command(flatten)]
        config: ConfigArgs,
        /// Worker threads (default: one per core).
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Time the per-video pipeline.
    Bench {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        reps: usize,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Check ids, detection paths and signer/split discipline.
    Validate {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Write a synthetic gesture corpus and its manifest.
    Synth {
        #[arg(long, default_value_t = 5)]
        classes: usize,
        #[arg(long, default_value_t = 80)]
        per_class: usize,
        #[arg(long, default_value_t = 0.01)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// Minimum detection score.
    #[arg(long, default_value_t = 0.55)]
    confidence: f64,
    /// Resting-pose threshold in source pixels.
    #[arg(long, default_value_t = 10.0)]
    eta: f64,
    /// Slow-transition threshold in source pixels.
    #[arg(long, default_value_t = 5.0)]
    eta_hat: f64,
    /// Frames per video.
    #[arg(long, default_value_t = 16)]
    frames: usize,
    /// Largest padded count for a valid record.
    #[arg(long, default_value_t = 5)]
    max_padding: usize,
    /// Box area expansion factor.
    #[arg(long, default_value_t = 1.10)]
    box_expand: f64,
    /// Source frame side in pixels.
    #[arg(long, default_value_t = 512.0)]
    frame_size: f64,
}

impl ConfigArgs {
    fn config(&self) -> Result<SamplerConfig, Failure> {
        let cfg = SamplerConfig {
            target_frames: self.frames,
            eta: self.eta,
            eta_hat: self.eta_hat,
            max_padded: self.max_padding,
            confidence: self.confidence,
            box_area_factor: self.box_expand,
            source_frame_size: self.frame_size,
        };
        cfg.validate().map_err(|e| Failure::new(USAGE, e.into()))?;
        Ok(cfg)
    }
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn new(code: u8, error: anyhow::Error) -> Self {
        Self { code, error }
    }
}

fn load_manifest(path: &Path) -> Result<Manifest, Failure> {
    Manifest::load(path).map_err(|e| Failure::new(MANIFEST, e.into()))
}

fn batch_failure(e: BatchError) -> Failure {
    let code = match e {
        BatchError::Config(_) | BatchError::NoRepetitions => USAGE,
        _ => MANIFEST,
    };
    Failure::new(code, e.into())
}

fn print_json(text: serde_json::Result<String>) {
    println!("{}", text.expect("report serializes"));
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Extract {
            manifest,
            out,
            emit_figures,
            config,
            workers,
        } => {
            let config = config.config()?;
            let m = load_manifest(&manifest)?;
            let opts = BatchOptions {
                config,
                figures: emit_figures.then(FigureSpec::default),
                workers,
            };
            let report = run_batch(&m, &opts, &out).map_err(batch_failure)?;
            for signer in &report.split_leakage {
                eprintln!("warning: signer `{signer}` appears in more than one split");
            }
            for e in &report.errors {
                eprintln!("error: {}: {}", e.video_id, e.error);
            }
            print_json(serde_json::to_string_pretty(&report));
            Ok(if report.has_failures() { PARTIAL } else { 0 })
        }
        Command::Bench {
            manifest,
            reps,
            config,
        } => {
            let config = config.config()?;
            let m = load_manifest(&manifest)?;
            let report = bench(&m, &config, reps).map_err(batch_failure)?;
            print_json(serde_json::to_string_pretty(&report));
            Ok(0)
        }
        Command::Validate { manifest } => {
            let m = load_manifest(&manifest)?;
            let issues = m.validate();
            for i in &issues {
                eprintln!("{i}");
            }
            if issues.is_empty() {
                println!("{}: {} entries, ok", manifest.display(), m.entries.len());
                Ok(0)
            } else {
                Ok(MANIFEST)
            }
        }
        Command::Synth {
            classes,
            per_class,
            sigma,
            seed,
            out,
        } => {
            let spec = CorpusSpec {
                classes,
                per_class,
                sigma,
                seed,
            };
            let m = write_corpus(&out, &spec).map_err(|e| {
                let code = if matches!(e, CorpusError::Synth(_)) {
                    USAGE
                } else {
                    MANIFEST
                };
                Failure::new(code, e.into())
            })?;
            let path = out.join("manifest.csv");
            println!("{}: {} videos", path.display(), m.entries.len());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.error);
            ExitCode::from(f.code)
        }
    }
}
