//! Batch extraction over a manifest, and the latency benchmark.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detection::ParseOptions;
use crate::manifest::{Manifest, ManifestEntry, ManifestIssue};
use crate::output::{self, FeatureBlock, RecordMeta, FEATURES_FILE, RECORDS_FILE, REPORT_FILE};
use crate::pipeline::{process_video, StreamError, VideoFeatureRecord, VideoStream};
use crate::raster::{write_png, FigureSpec, RasterError};
use crate::sampler::{ConfigError, SamplerConfig};
use crate::tracker::RejectCounts;

#[derive(Debug, Error)]
pub enum BatchError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("manifest has {} problem(s):\n{}", .0.len(), list(.0))]
    Manifest(Vec<ManifestIssue>),
    #[error("writing {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot build worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error("repetitions must be at least 1")]
    NoRepetitions,
    #[error("nothing to benchmark: manifest is empty")]
    EmptyManifest,
    #[error("video `{video_id}`: {source}")]
    Video {
        video_id: String,
        #[source]
        source: StreamError,
    },
}

fn list(issues: &[ManifestIssue]) -> String {
    issues
        .iter()
        .map(|i| format!("  {i}"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> BatchError + '_ {
    move |source| BatchError::Io {
        path: path.to_owned(),
        source,
    }
}

#[derive(Debug, Clone, Default)]
pub struct BatchOptions {
    pub config: SamplerConfig,
    /// `None` disables figure output.
    pub figures: Option<FigureSpec>,
    /// Worker threads; 0 lets the pool decide.
    pub workers: usize,
}

impl BatchOptions {
    fn parse_options(&self) -> ParseOptions {
        ParseOptions {
            fallback_frame_size: [self.config.source_frame_size; 2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VideoError {
    pub video_id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunReport {
    pub videos: usize,
    pub valid: usize,
    pub invalid: usize,
    pub errored: usize,
    pub invalid_reasons: BTreeMap<String, usize>,
    pub rejected_frames: RejectCounts,
    pub clamped_coordinates: u64,
    /// Signers found in more than one split.
    pub split_leakage: Vec<String>,
    pub errors: Vec<VideoError>,
}

impl RunReport {
    pub fn has_failures(&self) -> bool {
        self.errored > 0
    }

    fn tally(&mut self, rec: &VideoFeatureRecord) {
        if rec.valid {
            self.valid += 1;
        } else {
            self.invalid += 1;
        }
        if let Some(reason) = rec.invalid_reason {
            let key = serde_json::to_value(reason)
                .ok()
                .and_then(|v| v.as_str().map(str::to_owned))
                .unwrap_or_default();
            *self.invalid_reasons.entry(key).or_default() += 1;
        }
        self.rejected_frames.add(&rec.rejected);
        self.clamped_coordinates += u64::from(rec.warnings.clamped_coordinates);
    }
}

fn run_one(
    manifest: &Manifest,
    entry: &ManifestEntry,
    opts: &BatchOptions,
    out_dir: &Path,
) -> Result<VideoFeatureRecord, String> {
    let stream = VideoStream::read(
        &manifest.resolve(entry),
        Some(&entry.video_id),
        &opts.parse_options(),
    )
    .map_err(|e| e.to_string())?;
    let out = process_video(&stream, &opts.config, opts.figures.as_ref());
    if !out.figures.is_empty() {
        let dir = out_dir.join(&entry.video_id);
        fs::create_dir_all(&dir).map_err(|e| format!("creating {}: {e}", dir.display()))?;
        for (k, img) in out.figures.iter().enumerate() {
            write_png(img, &dir.join(format!("fig_{k:02}.png")))
                .map_err(|e: RasterError| e.to_string())?;
        }
    }
    let mut record = out.record;
    record.label = entry.label.clone();
    Ok(record)
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, BatchError> {
    Ok(rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()?)
}

/// Checks ids and paths up front, processes every video on a worker pool and
/// writes `records.jsonl`, `features.sgf` and `report.json` under
/// `out_dir`, in manifest order. A video that cannot be read is listed in
/// the report and gets no record; the others are unaffected. Signer
/// leakage across splits is reported, not fatal.
pub fn run_batch(
    manifest: &Manifest,
    opts: &BatchOptions,
    out_dir: &Path,
) -> Result<RunReport, BatchError> {
    opts.config.validate()?;
    let issues = manifest.structural_issues();
    if !issues.is_empty() {
        return Err(BatchError::Manifest(issues));
    }
    let split_leakage = manifest
        .leakage()
        .into_iter()
        .filter_map(|i| match i {
            ManifestIssue::SignerLeakage { signer_id, .. } => Some(signer_id),
            _ => None,
        })
        .collect();
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;

    let results: Vec<Result<VideoFeatureRecord, String>> = pool(opts.workers)?.install(|| {
        manifest
            .entries
            .par_iter()
            .map(|e| run_one(manifest, e, opts, out_dir))
            .collect()
    });

    let mut report = RunReport {
        videos: manifest.entries.len(),
        split_leakage,
        ..Default::default()
    };
    let records_path = out_dir.join(RECORDS_FILE);
    let features_path = out_dir.join(FEATURES_FILE);
    let mut records =
        BufWriter::new(fs::File::create(&records_path).map_err(io_err(&records_path))?);
    let mut features =
        BufWriter::new(fs::File::create(&features_path).map_err(io_err(&features_path))?);
    output::write_header(&mut features).map_err(io_err(&features_path))?;
    for (entry, result) in manifest.entries.iter().zip(results) {
        match result {
            Ok(rec) => {
                report.tally(&rec);
                output::write_records(&mut records, &[RecordMeta::from(&rec)])
                    .map_err(io_err(&records_path))?;
                output::write_block(&mut features, &FeatureBlock::from(&rec))
                    .map_err(io_err(&features_path))?;
            }
            Err(error) => {
                report.errored += 1;
                report.errors.push(VideoError {
                    video_id: entry.video_id.clone(),
                    error,
                });
            }
        }
    }
    records.flush().map_err(io_err(&records_path))?;
    features.flush().map_err(io_err(&features_path))?;

    let report_path = out_dir.join(REPORT_FILE);
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    fs::write(&report_path, text + "\n").map_err(io_err(&report_path))?;
    Ok(report)
}

/// Reads back the records written by [`run_batch`].
pub fn load_outputs(
    out_dir: &Path,
    target_frames: usize,
) -> Result<Vec<VideoFeatureRecord>, output::FormatError> {
    let metas = output::read_records(&fs::read_to_string(out_dir.join(RECORDS_FILE))?)?;
    let blocks = output::read_features(
        &mut fs::File::open(out_dir.join(FEATURES_FILE))?,
        target_frames,
    )?;
    output::join_records(metas, blocks)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LatencyStats {
    pub samples: usize,
    pub mean_ms: f64,
    pub median_ms: f64,
    pub p95_ms: f64,
    pub max_ms: f64,
}

impl LatencyStats {
    /// Nearest-rank percentiles over `ms`.
    pub fn from_samples(ms: &[f64]) -> Self {
        if ms.is_empty() {
            return Self::default();
        }
        let mut sorted = ms.to_vec();
        sorted.sort_by(f64::total_cmp);
        let rank =
            |p: f64| sorted[((p * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len()) - 1];
        Self {
            samples: sorted.len(),
            mean_ms: sorted.iter().sum::<f64>() / sorted.len() as f64,
            median_ms: rank(0.5),
            p95_ms: rank(0.95),
            max_ms: sorted[sorted.len() - 1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub videos: usize,
    pub repetitions: usize,
    /// Tracking, sampling and features; parsing excluded.
    pub geometry: LatencyStats,
    /// File read and parse plus the geometry pipeline.
    pub with_parsing: LatencyStats,
    /// Every repetition produced byte-identical output.
    pub deterministic: bool,
}

fn serialize_records(records: &[VideoFeatureRecord]) -> Vec<u8> {
    let mut buf = Vec::new();
    let blocks: Vec<FeatureBlock> = records.iter().map(FeatureBlock::from).collect();
    output::write_features(&mut buf, &blocks).expect("in-memory write");
    let metas: Vec<RecordMeta> = records.iter().map(RecordMeta::from).collect();
    output::write_records(&mut buf, &metas).expect("in-memory write");
    buf
}

/// Single-threaded per-video timing over `repetitions` passes.
pub fn bench(
    manifest: &Manifest,
    config: &SamplerConfig,
    repetitions: usize,
) -> Result<BenchReport, BatchError> {
    config.validate()?;
    if repetitions == 0 {
        return Err(BatchError::NoRepetitions);
    }
    if manifest.entries.is_empty() {
        return Err(BatchError::EmptyManifest);
    }
    let issues = manifest.structural_issues();
    if !issues.is_empty() {
        return Err(BatchError::Manifest(issues));
    }
    let parse = ParseOptions {
        fallback_frame_size: [config.source_frame_size; 2],
    };
    let mut geometry = Vec::with_capacity(manifest.entries.len() * repetitions);
    let mut total = Vec::with_capacity(geometry.capacity());
    let mut first: Option<Vec<u8>> = None;
    let mut deterministic = true;
    for _ in 0..repetitions {
        let mut records = Vec::with_capacity(manifest.entries.len());
        for entry in &manifest.entries {
            let t0 = Instant::now();
            let stream = VideoStream::read(&manifest.resolve(entry), Some(&entry.video_id), &parse)
                .map_err(|source| BatchError::Video {
                    video_id: entry.video_id.clone(),
                    source,
                })?;
            let t1 = Instant::now();
            let out = process_video(&stream, config, None);
            let t2 = Instant::now();
            geometry.push((t2 - t1).as_secs_f64() * 1e3);
            total.push((t2 - t0).as_secs_f64() * 1e3);
            records.push(out.record);
        }
        let bytes = serialize_records(&records);
        match &first {
            None => first = Some(bytes),
            Some(b) => deterministic &= *b == bytes,
        }
    }
    Ok(BenchReport {
        videos: manifest.entries.len(),
        repetitions,
        geometry: LatencyStats::from_samples(&geometry),
        with_parsing: LatencyStats::from_samples(&total),
        deterministic,
    })
}
