//! Output files: `records.jsonl` (one metadata object per video) and
//! `features.sgf` (binary feature matrices).
//!
//! `features.sgf` layout, all little endian:
//!
//! ```text
//! "SGF1"
//! repeated:
//!   u32        id length in bytes
//!   [u8]       id, UTF-8
//!   f32 * F*13 features, row major
//!   u8 * F     padding mask (1 = padded)
//!   u8         validity (1 = valid)
//! ```
//!
//! `F` is the target frame count; it is not stored and must be supplied
//! when reading (16 by default).

use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::FEATURE_COUNT;
use crate::pipeline::{InvalidReason, VideoFeatureRecord, Warnings};
use crate::tracker::{HandId, RejectCounts};

pub const MAGIC: &[u8; 4] = b"SGF1";
pub const RECORDS_FILE: &str = "records.jsonl";
pub const FEATURES_FILE: &str = "features.sgf";
pub const REPORT_FILE: &str = "report.json";

/// One line of `records.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordMeta {
    pub video_id: String,
    pub label: Option<String>,
    pub dominant: HandId,
    pub valid: bool,
    pub invalid_reason: Option<InvalidReason>,
    pub step_used: usize,
    pub padded: usize,
    pub padding_mask: Vec<bool>,
    pub selected_indices: Vec<u64>,
    pub rejected: RejectCounts,
    pub warnings: Warnings,
}

impl From<&VideoFeatureRecord> for RecordMeta {
    fn from(r: &VideoFeatureRecord) -> Self {
        Self {
            video_id: r.video_id.clone(),
            label: r.label.clone(),
            dominant: r.dominant,
            valid: r.valid,
            invalid_reason: r.invalid_reason,
            step_used: r.step_used,
            padded: r.padded_count(),
            padding_mask: r.padding_mask.clone(),
            selected_indices: r.selected_indices.clone(),
            rejected: r.rejected,
            warnings: r.warnings,
        }
    }
}

/// One record of `features.sgf`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBlock {
    pub video_id: String,
    pub features: Vec<[f32; FEATURE_COUNT]>,
    pub padding_mask: Vec<bool>,
    pub valid: bool,
}

impl From<&VideoFeatureRecord> for FeatureBlock {
    fn from(r: &VideoFeatureRecord) -> Self {
        Self {
            video_id: r.video_id.clone(),
            features: r.features.clone(),
            padding_mask: r.padding_mask.clone(),
            valid: r.valid,
        }
    }
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("bad magic {0:?}, expected SGF1")]
    Magic([u8; 4]),
    #[error("record {index}: {reason}")]
    Record { index: usize, reason: String },
    #[error("records.jsonl line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

pub fn write_header<W: Write>(w: &mut W) -> io::Result<()> {
    w.write_all(MAGIC)
}

/// Writes one record. Every block must have the same frame count.
pub fn write_block<W: Write>(w: &mut W, block: &FeatureBlock) -> io::Result<()> {
    let id = block.video_id.as_bytes();
    let len = u32::try_from(id.len())
        .map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "video id too long"))?;
    w.write_all(&len.to_le_bytes())?;
    w.write_all(id)?;
    for row in &block.features {
        for v in row {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    let mask: Vec<u8> = block.padding_mask.iter().map(|&p| u8::from(p)).collect();
    w.write_all(&mask)?;
    w.write_all(&[u8::from(block.valid)])
}

pub fn write_features<W: Write>(w: &mut W, blocks: &[FeatureBlock]) -> io::Result<()> {
    write_header(w)?;
    for b in blocks {
        write_block(w, b)?;
    }
    Ok(())
}

/// Reads a whole `features.sgf` stream with `frames` rows per record.
pub fn read_features<R: Read>(r: &mut R, frames: usize) -> Result<Vec<FeatureBlock>, FormatError> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let mut magic = [0u8; 4];
    if bytes.len() < 4 {
        return Err(FormatError::Magic(magic));
    }
    magic.copy_from_slice(&bytes[..4]);
    if &magic != MAGIC {
        return Err(FormatError::Magic(magic));
    }
    let mut pos = 4;
    let mut out = Vec::new();
    while pos < bytes.len() {
        let index = out.len();
        let truncated = || FormatError::Record {
            index,
            reason: "truncated".into(),
        };
        let mut take = |n: usize| -> Result<&[u8], FormatError> {
            let s = bytes.get(pos..pos + n).ok_or_else(truncated)?;
            pos += n;
            Ok(s)
        };
        let len = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
        let video_id = String::from_utf8(take(len)?.to_vec()).map_err(|e| FormatError::Record {
            index,
            reason: e.to_string(),
        })?;
        let raw = take(frames * FEATURE_COUNT * 4)?;
        let features = raw
            .chunks_exact(FEATURE_COUNT * 4)
            .map(|row| {
                std::array::from_fn(|j| {
                    f32::from_le_bytes(row[j * 4..j * 4 + 4].try_into().unwrap())
                })
            })
            .collect();
        let padding_mask = take(frames)?.iter().map(|&b| b != 0).collect();
        let valid = take(1)?[0] != 0;
        out.push(FeatureBlock {
            video_id,
            features,
            padding_mask,
            valid,
        });
    }
    Ok(out)
}

pub fn write_records<W: Write>(w: &mut W, metas: &[RecordMeta]) -> io::Result<()> {
    for m in metas {
        serde_json::to_writer(&mut *w, m)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_records(text: &str) -> Result<Vec<RecordMeta>, FormatError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|source| FormatError::Json {
                line: i + 1,
                source,
            })
        })
        .collect()
}

/// Reassembles full records from the two files' contents.
pub fn join_records(
    metas: Vec<RecordMeta>,
    blocks: Vec<FeatureBlock>,
) -> Result<Vec<VideoFeatureRecord>, FormatError> {
    if metas.len() != blocks.len() {
        return Err(FormatError::Record {
            index: metas.len().min(blocks.len()),
            reason: format!(
                "{} metadata lines but {} feature records",
                metas.len(),
                blocks.len()
            ),
        });
    }
    metas
        .into_iter()
        .zip(blocks)
        .enumerate()
        .map(|(index, (m, b))| {
            if m.video_id != b.video_id {
                return Err(FormatError::Record {
                    index,
                    reason: format!("id `{}` vs `{}`", m.video_id, b.video_id),
                });
            }
            Ok(VideoFeatureRecord {
                video_id: m.video_id,
                label: m.label,
                dominant: m.dominant,
                features: b.features,
                padding_mask: b.padding_mask,
                selected_indices: m.selected_indices,
                step_used: m.step_used,
                valid: b.valid,
                invalid_reason: m.invalid_reason,
                rejected: m.rejected,
                warnings: m.warnings,
            })
        })
        .collect()
}
