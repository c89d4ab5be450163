//! Fixed-length frame selection.
//!
//! Frames are visited at a stride of `floor(n / target)`. The hand position
//! of a visited frame is the sum of both hands' distances to the face and
//! movement is the absolute change of that sum between visited frames.
//! Leading frames are dropped until movement first exceeds `eta` (resting
//! pose); afterwards a frame is dropped when the last three movements are
//! all below `eta_hat` (slow transition). A pass that yields too few frames
//! is retried with the stride reduced by one, down to 1. Any remaining
//! deficit is zero-padded.
//!
//! Thresholds are in source-frame pixels; normalized movements are scaled
//! by `source_frame_size` before comparison.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;
use crate::tracker::{dominance_from_motion, HandId, RejectCounts, TrackedFrame};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub target_frames: usize,
    /// Resting-pose threshold, source pixels.
    pub eta: f64,
    /// Slow-transition threshold, source pixels.
    pub eta_hat: f64,
    pub max_padded: usize,
    pub confidence: f64,
    pub box_area_factor: f64,
    /// Source frame side in pixels.
    pub source_frame_size: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            target_frames: 16,
            eta: 10.0,
            eta_hat: 5.0,
            max_padded: 5,
            confidence: 0.55,
            box_area_factor: 1.10,
            source_frame_size: 512.0,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("target frame count must be at least 1")]
    NoFrames,
    #[error("thresholds must satisfy eta > eta_hat > 0 (eta={eta}, eta_hat={eta_hat})")]
    Thresholds { eta: f64, eta_hat: f64 },
    #[error("max padding {max_padded} must be below the target frame count {target}")]
    Padding { max_padded: usize, target: usize },
    #[error("confidence threshold {0} outside [0, 1]")]
    Confidence(f64),
    #[error("box area factor {0} below 1")]
    BoxFactor(f64),
    #[error("source frame size {0} must be positive")]
    FrameSize(f64),
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.target_frames == 0 {
            return Err(ConfigError::NoFrames);
        }
        if !(self.eta > self.eta_hat && self.eta_hat > 0.0) {
            return Err(ConfigError::Thresholds {
                eta: self.eta,
                eta_hat: self.eta_hat,
            });
        }
        if self.max_padded >= self.target_frames {
            return Err(ConfigError::Padding {
                max_padded: self.max_padded,
                target: self.target_frames,
            });
        }
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err(ConfigError::Confidence(self.confidence));
        }
        if self.box_area_factor.is_nan() || self.box_area_factor < 1.0 {
            return Err(ConfigError::BoxFactor(self.box_area_factor));
        }
        if !(self.source_frame_size > 0.0 && self.source_frame_size.is_finite()) {
            return Err(ConfigError::FrameSize(self.source_frame_size));
        }
        Ok(())
    }
}

/// Hand position of one frame: summed hand-to-face distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionSample<T> {
    pub frame_index: u64,
    pub rho: T,
    pub rho_h1: T,
    pub rho_h2: T,
}

impl<T: Scalar> PositionSample<T> {
    pub fn of(frame: &TrackedFrame<T>) -> Self {
        let [rho_h1, rho_h2] = frame.face_distances();
        Self {
            frame_index: frame.frame_index,
            rho: rho_h1 + rho_h2,
            rho_h1,
            rho_h2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MovementSample<T> {
    pub frame_index: u64,
    pub mu: T,
    pub mu_h1: T,
    pub mu_h2: T,
}

/// `max(1, floor(total / target))`.
pub fn compute_step(total_frames: usize, target: usize) -> usize {
    (total_frames / target.max(1)).max(1)
}

/// Absolute first differences; element `t` is stamped with the later frame.
pub fn movement_series<T: Scalar>(positions: &[PositionSample<T>]) -> Vec<MovementSample<T>> {
    positions
        .windows(2)
        .map(|w| MovementSample {
            frame_index: w[1].frame_index,
            mu: (w[1].rho - w[0].rho).abs(),
            mu_h1: (w[1].rho_h1 - w[0].rho_h1).abs(),
            mu_h2: (w[1].rho_h2 - w[0].rho_h2).abs(),
        })
        .collect()
}

/// One selection pass at a fixed stride. Returns positions into `frames`.
///
/// If the very first movement already breaks the resting pose, the first
/// visited frame is kept as well.
pub fn sample_pass<T: Scalar>(
    frames: &[TrackedFrame<T>],
    step: usize,
    cfg: &SamplerConfig,
) -> Vec<usize> {
    let target = cfg.target_frames;
    let visited: Vec<usize> = (0..frames.len()).step_by(step.max(1)).collect();
    let positions: Vec<PositionSample<T>> = visited
        .iter()
        .map(|&i| PositionSample::of(&frames[i]))
        .collect();
    let moves = movement_series(&positions);

    let scale = T::lit(cfg.source_frame_size);
    let eta = T::lit(cfg.eta);
    let eta_hat = T::lit(cfg.eta_hat);

    let mut selected = Vec::with_capacity(target);
    // index into `moves` of the movement that ended the resting pose
    let mut active_from: Option<usize> = None;
    for (k, m) in moves.iter().enumerate() {
        if selected.len() >= target {
            break;
        }
        let frame_pos = visited[k + 1];
        match active_from {
            None => {
                if m.mu * scale > eta {
                    active_from = Some(k);
                    if k == 0 {
                        selected.push(visited[0]);
                    }
                    if selected.len() < target {
                        selected.push(frame_pos);
                    }
                }
            }
            Some(start) => {
                let active = &moves[start..=k];
                let slow = active.len() >= 3
                    && active[active.len() - 3..]
                        .iter()
                        .all(|m| m.mu * scale < eta_hat);
                if !slow {
                    selected.push(frame_pos);
                }
            }
        }
    }
    selected
}

/// Fixed-length selection for one video.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledVideo<T> {
    pub video_id: String,
    /// Exactly `target_frames` entries; padding at the tail.
    pub selected: Vec<TrackedFrame<T>>,
    /// Positions of the selected frames in the input sequence.
    pub selected_positions: Vec<usize>,
    /// `true` marks a padded entry.
    pub padding_mask: Vec<bool>,
    /// Per entry `[hand1, hand2]` change of distance-to-face since the
    /// previous selected frame; zero for the first and for padding.
    pub movements: Vec<[T; 2]>,
    pub dominant: HandId,
    pub valid: bool,
    pub step_used: usize,
    pub frames_rejected: RejectCounts,
}

impl<T: Scalar> SampledVideo<T> {
    pub fn padded_count(&self) -> usize {
        self.padding_mask.iter().filter(|&&p| p).count()
    }

    /// Source frame indices of the non-padded entries.
    pub fn selected_indices(&self) -> Vec<u64> {
        self.selected
            .iter()
            .zip(&self.padding_mask)
            .filter(|(_, &p)| !p)
            .map(|(f, _)| f.frame_index)
            .collect()
    }
}

/// Selects `cfg.target_frames` frames from one video's accepted frames.
pub fn sample_video<T: Scalar>(frames: &[TrackedFrame<T>], cfg: &SamplerConfig) -> SampledVideo<T> {
    let target = cfg.target_frames;
    let mut step = compute_step(frames.len(), target);
    let picks = loop {
        let picks = sample_pass(frames, step, cfg);
        if picks.len() >= target || step == 1 {
            break picks;
        }
        step -= 1;
    };

    let mut movements = Vec::with_capacity(target);
    let mut totals = [T::zero(); 2];
    let mut prev: Option<PositionSample<T>> = None;
    for &i in &picks {
        let cur = PositionSample::of(&frames[i]);
        let m = match prev {
            Some(p) => [(cur.rho_h1 - p.rho_h1).abs(), (cur.rho_h2 - p.rho_h2).abs()],
            None => [T::zero(); 2],
        };
        totals[0] = totals[0] + m[0];
        totals[1] = totals[1] + m[1];
        movements.push(m);
        prev = Some(cur);
    }

    let padded = target - picks.len();
    let mut selected: Vec<TrackedFrame<T>> = picks.iter().map(|&i| frames[i]).collect();
    selected.resize(target, TrackedFrame::padding());
    movements.resize(target, [T::zero(); 2]);
    let mut padding_mask = vec![false; picks.len()];
    padding_mask.resize(target, true);

    SampledVideo {
        video_id: String::new(),
        selected,
        selected_positions: picks,
        padding_mask,
        movements,
        dominant: dominance_from_motion(totals[0], totals[1]),
        valid: !frames.is_empty() && padded <= cfg.max_padded,
        step_used: step,
        frames_rejected: RejectCounts::default(),
    }
}
