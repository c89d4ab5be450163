//! Per-video pipeline: select and expand detections, track hands in two
//! passes, sample frames, compute features and optionally render figures.
//!
//! The first tracking pass runs without knowing which hand is dominant and
//! only rejects frames that cannot be filled from history. Dominance is
//! resolved from the first pass's selection; the second pass then also
//! rejects every frame missing that hand, and its selection is final.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detection::{
    expand_box, parse_frame_with, select_detections, Detection, FrameDetections, ParseError,
    ParseOptions,
};
use crate::features::{feature_vector, FEATURE_COUNT};
use crate::raster::{render_figure, FigureImage, FigureSpec};
use crate::sampler::{sample_video, SampledVideo, SamplerConfig};
use crate::tracker::{HandId, RejectCounts, TrackState, TrackedFrame};

/// All frames of one video, in order.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoStream {
    pub video_id: String,
    pub frames: Vec<FrameDetections>,
    /// Coordinates clamped into `[0, 1]` while parsing.
    pub clamped: u32,
}

#[derive(Debug, Error)]
pub enum StreamError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: ParseError,
    },
    #[error("frame {frame_index} belongs to video `{found}`, expected `{expected}`")]
    MixedVideo {
        expected: String,
        found: String,
        frame_index: u64,
    },
    #[error("frame index {current} does not follow {previous}")]
    FrameOrder { previous: u64, current: u64 },
}

impl VideoStream {
    /// Builds a stream, checking the one-video and increasing-index rules.
    /// An empty frame list is accepted and yields an invalid record.
    pub fn from_frames(
        video_id: impl Into<String>,
        frames: Vec<FrameDetections>,
        clamped: u32,
    ) -> Result<Self, StreamError> {
        let video_id = video_id.into();
        let mut last: Option<u64> = None;
        for f in &frames {
            if f.video_id != video_id {
                return Err(StreamError::MixedVideo {
                    expected: video_id,
                    found: f.video_id.clone(),
                    frame_index: f.frame_index,
                });
            }
            if let Some(prev) = last {
                if f.frame_index <= prev {
                    return Err(StreamError::FrameOrder {
                        previous: prev,
                        current: f.frame_index,
                    });
                }
            }
            last = Some(f.frame_index);
        }
        Ok(Self {
            video_id,
            frames,
            clamped,
        })
    }

    /// Parses JSON-lines text; blank lines are skipped. The video id is
    /// taken from `expected_id` or else from the first record.
    pub fn parse(
        text: &str,
        expected_id: Option<&str>,
        opts: &ParseOptions,
    ) -> Result<Self, (usize, ParseError)> {
        let mut frames = Vec::new();
        let mut clamped = 0;
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let parsed = parse_frame_with(line, i + 1, opts).map_err(|e| (i + 1, e))?;
            clamped += parsed.clamped;
            frames.push(parsed.frame);
        }
        let video_id = expected_id
            .map(str::to_owned)
            .or_else(|| frames.first().map(|f| f.video_id.clone()))
            .unwrap_or_default();
        Ok(Self {
            video_id,
            frames,
            clamped,
        })
    }

    pub fn read(
        path: &Path,
        expected_id: Option<&str>,
        opts: &ParseOptions,
    ) -> Result<Self, StreamError> {
        let text = fs::read_to_string(path).map_err(|source| StreamError::Io {
            path: path.to_owned(),
            source,
        })?;
        let raw =
            Self::parse(&text, expected_id, opts).map_err(|(_, source)| StreamError::Parse {
                path: path.to_owned(),
                source,
            })?;
        Self::from_frames(raw.video_id, raw.frames, raw.clamped)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for f in &self.frames {
            out.push_str(&f.to_json_line());
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvalidReason {
    EmptyStream,
    NoDetections,
    TooMuchPadding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Warnings {
    pub clamped_coordinates: u32,
}

/// Final per-video output.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoFeatureRecord {
    pub video_id: String,
    pub label: Option<String>,
    pub dominant: HandId,
    /// `target_frames` rows of 13 features; padded rows are zero.
    pub features: Vec<[f32; FEATURE_COUNT]>,
    pub padding_mask: Vec<bool>,
    pub selected_indices: Vec<u64>,
    pub step_used: usize,
    pub valid: bool,
    pub invalid_reason: Option<InvalidReason>,
    pub rejected: RejectCounts,
    pub warnings: Warnings,
}

impl VideoFeatureRecord {
    pub fn padded_count(&self) -> usize {
        self.padding_mask.iter().filter(|&&p| p).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VideoOutput {
    pub record: VideoFeatureRecord,
    pub sampled: SampledVideo<f64>,
    /// One image per non-padded slot, in slot order; empty unless requested.
    pub figures: Vec<FigureImage>,
}

fn track(
    frames: &[FrameDetections],
    cfg: &SamplerConfig,
    dominant: Option<HandId>,
) -> (Vec<TrackedFrame<f64>>, RejectCounts) {
    let mut state = TrackState::new();
    let mut accepted = Vec::with_capacity(frames.len());
    let mut rejected = RejectCounts::default();
    let expand = |d: &Detection<f64>| Detection {
        bbox: expand_box(d.bbox, cfg.box_area_factor),
        ..*d
    };
    for f in frames {
        let sel = select_detections(&f.detections, cfg.confidence);
        let face = sel.face.as_ref().map(expand);
        let hands: Vec<Detection<f64>> = sel.hands.iter().map(expand).collect();
        match state.resolve_frame(f.frame_index, face.as_ref(), &hands, dominant) {
            Ok(t) => accepted.push(t),
            Err(reason) => rejected.record(reason),
        }
    }
    (accepted, rejected)
}

/// Runs the full pipeline on one video. `figures` enables rendering.
pub fn process_video(
    stream: &VideoStream,
    cfg: &SamplerConfig,
    figures: Option<&FigureSpec>,
) -> VideoOutput {
    let (first_pass, first_rejected) = track(&stream.frames, cfg, None);
    let (mut sampled, rejected) = if first_pass.is_empty() {
        (sample_video(&first_pass, cfg), first_rejected)
    } else {
        let provisional = sample_video(&first_pass, cfg).dominant;
        let (second_pass, rejected) = track(&stream.frames, cfg, Some(provisional));
        (sample_video(&second_pass, cfg), rejected)
    };
    sampled.video_id = stream.video_id.clone();
    sampled.frames_rejected = rejected;

    let dominant = sampled.dominant;
    let features = sampled
        .selected
        .iter()
        .zip(&sampled.movements)
        .map(|(frame, m)| {
            let oriented = frame.oriented(dominant);
            let [m_dom, m_other] = match dominant {
                HandId::Hand1 => *m,
                HandId::Hand2 => [m[1], m[0]],
            };
            feature_vector(&oriented, m_dom, m_other)
                .to_array()
                .map(|v| v as f32)
        })
        .collect();

    let invalid_reason = if stream.frames.is_empty() {
        Some(InvalidReason::EmptyStream)
    } else if first_pass.is_empty() {
        Some(InvalidReason::NoDetections)
    } else if !sampled.valid {
        Some(InvalidReason::TooMuchPadding)
    } else {
        None
    };

    let figures = match figures {
        Some(spec) => sampled
            .selected
            .iter()
            .zip(&sampled.padding_mask)
            .filter(|(_, &pad)| !pad)
            .map(|(f, _)| render_figure(f, dominant, spec))
            .collect(),
        None => Vec::new(),
    };

    let record = VideoFeatureRecord {
        video_id: stream.video_id.clone(),
        label: None,
        dominant,
        features,
        padding_mask: sampled.padding_mask.clone(),
        selected_indices: sampled.selected_indices(),
        step_used: sampled.step_used,
        valid: invalid_reason.is_none(),
        invalid_reason,
        rejected,
        warnings: Warnings {
            clamped_coordinates: stream.clamped,
        },
    };
    VideoOutput {
        record,
        sampled,
        figures,
    }
}
