//! Synthetic gesture streams with known class structure, and a
//! nearest-mean classifier over feature records.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::detection::{BoundingBox, Centroid, ClassLabel, Detection, FrameDetections};
use crate::features::FEATURE_COUNT;
use crate::manifest::{Manifest, ManifestEntry, ManifestError, Split};
use crate::pipeline::{process_video, VideoFeatureRecord, VideoStream};
use crate::sampler::SamplerConfig;

/// Side of every generated box, normalized.
pub const BOX_SIZE: f64 = 0.12;
/// Noisy centers are clamped here so boxes never leave the frame.
const CENTER_MIN: f64 = BOX_SIZE / 2.0;
const CENTER_MAX: f64 = 1.0 - BOX_SIZE / 2.0;

/// A point path over `t` in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum Trajectory {
    Static(Centroid<f64>),
    Linear {
        from: Centroid<f64>,
        to: Centroid<f64>,
    },
    /// `turns` full revolutions starting at angle `phase`; negative turns
    /// run clockwise.
    Circle {
        center: Centroid<f64>,
        radius: f64,
        phase: f64,
        turns: f64,
    },
    /// Back and forth between two points, `cycles` round trips.
    Oscillate {
        from: Centroid<f64>,
        to: Centroid<f64>,
        cycles: f64,
    },
    /// Holds the start of `then` until `until`, then plays it over the
    /// remaining time.
    Hold {
        until: f64,
        then: Box<Trajectory>,
    },
}

fn lerp(a: Centroid<f64>, b: Centroid<f64>, s: f64) -> Centroid<f64> {
    Centroid::new(a.x + (b.x - a.x) * s, a.y + (b.y - a.y) * s)
}

impl Trajectory {
    pub fn at(&self, t: f64) -> Centroid<f64> {
        let t = t.clamp(0.0, 1.0);
        match self {
            Trajectory::Static(p) => *p,
            Trajectory::Linear { from, to } => lerp(*from, *to, t),
            Trajectory::Circle {
                center,
                radius,
                phase,
                turns,
            } => {
                let a = phase + std::f64::consts::TAU * turns * t;
                Centroid::new(center.x + radius * a.cos(), center.y + radius * a.sin())
            }
            Trajectory::Oscillate { from, to, cycles } => {
                let s = 0.5 - 0.5 * (std::f64::consts::TAU * cycles * t).cos();
                lerp(*from, *to, s)
            }
            Trajectory::Hold { until, then } => {
                if t <= *until {
                    then.at(0.0)
                } else {
                    then.at((t - until) / (1.0 - until))
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GestureTemplate {
    pub class_id: usize,
    pub name: &'static str,
    pub face: Centroid<f64>,
    /// The template's dominant hand.
    pub hand1: Trajectory,
    pub hand2: Trajectory,
    pub duration_frames: usize,
    /// Extra static frames (trajectory held at `t = 0`) before the gesture.
    pub rest_frames: usize,
    pub noise_sigma: f64,
    /// Probability of dropping the non-dominant hand in a frame.
    pub dropout: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("template `{0}`: duration must be at least 20 frames")]
    TooShort(&'static str),
    #[error("template `{name}`: point ({x:.3}, {y:.3}) at t={t:.3} outside [0.05, 0.95]")]
    OutOfRange {
        name: &'static str,
        x: f64,
        y: f64,
        t: f64,
    },
    #[error(
        "template `{0}`: noise sigma and dropout must be finite, sigma >= 0 and dropout in [0, 1]"
    )]
    Parameters(&'static str),
    #[error("between 1 and 5 classes are available, {0} requested")]
    Classes(usize),
    #[error("need at least 3 videos per class, got {0}")]
    PerClass(usize),
}

impl GestureTemplate {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.duration_frames < 20 {
            return Err(SynthError::TooShort(self.name));
        }
        if !(self.noise_sigma >= 0.0
            && self.noise_sigma.is_finite()
            && (0.0..=1.0).contains(&self.dropout))
        {
            return Err(SynthError::Parameters(self.name));
        }
        for i in 0..=200 {
            let t = i as f64 / 200.0;
            for p in [self.face, self.hand1.at(t), self.hand2.at(t)] {
                if !(0.05..=0.95).contains(&p.x) || !(0.05..=0.95).contains(&p.y) {
                    return Err(SynthError::OutOfRange {
                        name: self.name,
                        x: p.x,
                        y: p.y,
                        t,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn total_frames(&self) -> usize {
        self.rest_frames + self.duration_frames
    }

    /// Noise-free face, hand 1, hand 2 at frame `i`.
    pub fn points(&self, i: usize) -> [Centroid<f64>; 3] {
        let t = i.saturating_sub(self.rest_frames) as f64 / (self.duration_frames - 1) as f64;
        [self.face, self.hand1.at(t), self.hand2.at(t)]
    }

    pub fn with_noise(mut self, sigma: f64) -> Self {
        self.noise_sigma = sigma;
        self
    }
}

pub const TEMPLATE_NAMES: [&str; 5] = [
    "bilateral_circle",
    "unilateral_raise",
    "lateral_sweep",
    "diagonal_cross",
    "hold_then_tap",
];

fn p(x: f64, y: f64) -> Centroid<f64> {
    Centroid::new(x, y)
}

/// Built-in template `class_id` (0..5) with 48 frames.
pub fn builtin_template(class_id: usize, noise_sigma: f64) -> Option<GestureTemplate> {
    let (hand1, hand2) = match class_id {
        0 => (
            Trajectory::Circle {
                center: p(0.32, 0.62),
                radius: 0.12,
                phase: 0.0,
                turns: 1.0,
            },
            Trajectory::Circle {
                center: p(0.68, 0.62),
                radius: 0.12,
                phase: std::f64::consts::PI,
                turns: -1.0,
            },
        ),
        1 => (
            Trajectory::Linear {
                from: p(0.35, 0.85),
                to: p(0.42, 0.3),
            },
            Trajectory::Static(p(0.72, 0.82)),
        ),
        2 => (
            Trajectory::Linear {
                from: p(0.15, 0.55),
                to: p(0.85, 0.55),
            },
            Trajectory::Static(p(0.7, 0.88)),
        ),
        3 => (
            Trajectory::Linear {
                from: p(0.15, 0.3),
                to: p(0.75, 0.9),
            },
            Trajectory::Linear {
                from: p(0.75, 0.45),
                to: p(0.55, 0.55),
            },
        ),
        4 => (
            Trajectory::Hold {
                until: 0.35,
                then: Box::new(Trajectory::Oscillate {
                    from: p(0.32, 0.75),
                    to: p(0.45, 0.35),
                    cycles: 2.0,
                }),
            },
            Trajectory::Static(p(0.68, 0.75)),
        ),
        _ => return None,
    };
    Some(GestureTemplate {
        class_id,
        name: TEMPLATE_NAMES[class_id],
        face: p(0.5, 0.2),
        hand1,
        hand2,
        duration_frames: 48,
        rest_frames: 0,
        noise_sigma,
        dropout: 0.0,
    })
}

fn noisy(c: Centroid<f64>, noise: &Normal<f64>, rng: &mut impl Rng) -> Centroid<f64> {
    Centroid::new(
        (c.x + noise.sample(rng)).clamp(CENTER_MIN, CENTER_MAX),
        (c.y + noise.sample(rng)).clamp(CENTER_MIN, CENTER_MAX),
    )
}

fn boxed(class: ClassLabel, c: Centroid<f64>, rng: &mut impl Rng) -> Detection<f64> {
    let h = BOX_SIZE / 2.0;
    Detection {
        class,
        score: rng.random_range(0.7..=0.99),
        bbox: BoundingBox::new(c.x - h, c.y - h, c.x + h, c.y + h),
    }
}

/// Detection stream for one performance of `template`. Hands are listed in
/// random order; the face comes first.
pub fn generate(template: &GestureTemplate, video_id: &str, seed: u64) -> Vec<FrameDetections> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, template.noise_sigma).expect("sigma is finite and non-negative");
    (0..template.total_frames())
        .map(|i| {
            let [face, h1, h2] = template.points(i);
            let mut hands = vec![boxed(
                ClassLabel::Hand,
                noisy(h1, &noise, &mut rng),
                &mut rng,
            )];
            let drop = template.dropout > 0.0 && rng.random_bool(template.dropout);
            if !drop {
                hands.push(boxed(
                    ClassLabel::Hand,
                    noisy(h2, &noise, &mut rng),
                    &mut rng,
                ));
            }
            hands.shuffle(&mut rng);
            let mut detections = vec![boxed(
                ClassLabel::Face,
                noisy(face, &noise, &mut rng),
                &mut rng,
            )];
            detections.extend(hands);
            FrameDetections {
                video_id: video_id.to_owned(),
                frame_index: i as u64,
                detections,
            }
        })
        .collect()
}

/// Generates and runs the pipeline; the record is labelled with the
/// template name.
pub fn synth_record(
    template: &GestureTemplate,
    video_id: &str,
    seed: u64,
    cfg: &SamplerConfig,
) -> VideoFeatureRecord {
    let stream = VideoStream::from_frames(video_id, generate(template, video_id, seed), 0)
        .expect("generated streams are well formed");
    let mut rec = process_video(&stream, cfg, None).record;
    rec.label = Some(template.name.to_owned());
    rec
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusSpec {
    pub classes: usize,
    pub per_class: usize,
    pub sigma: f64,
    pub seed: u64,
}

/// Signers per class; signer `j` of a class goes to train for `j < 6`,
/// validation for `j < 8`, test otherwise.
const SIGNERS_PER_CLASS: usize = 10;

fn split_of(signer: usize) -> Split {
    match signer {
        0..=5 => Split::Train,
        6..=7 => Split::Validation,
        _ => Split::Test,
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("writing {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Manifest(#[from] ManifestError),
}

/// Writes `videos/<id>.jsonl` files and `manifest.csv` under `out`.
/// Each signer appears in exactly one split.
pub fn write_corpus(out: &Path, spec: &CorpusSpec) -> Result<Manifest, CorpusError> {
    if spec.classes == 0 || spec.classes > TEMPLATE_NAMES.len() {
        return Err(SynthError::Classes(spec.classes).into());
    }
    if spec.per_class < 3 {
        return Err(SynthError::PerClass(spec.per_class).into());
    }
    let videos = out.join("videos");
    fs::create_dir_all(&videos).map_err(|source| CorpusError::Io {
        path: videos.clone(),
        source,
    })?;
    let mut seeds = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut entries = Vec::with_capacity(spec.classes * spec.per_class);
    for class_id in 0..spec.classes {
        let template = builtin_template(class_id, spec.sigma).expect("class id checked");
        template.validate()?;
        for i in 0..spec.per_class {
            let video_id = format!("{}_{i:04}", template.name);
            let frames = generate(&template, &video_id, seeds.next_u64());
            let rel = PathBuf::from("videos").join(format!("{video_id}.jsonl"));
            let path = out.join(&rel);
            let text: String = frames.iter().map(|f| f.to_json_line() + "\n").collect();
            fs::write(&path, text).map_err(|source| CorpusError::Io {
                path: path.clone(),
                source,
            })?;
            let signer = i % SIGNERS_PER_CLASS;
            entries.push(ManifestEntry {
                video_id,
                detections: rel,
                label: Some(template.name.to_owned()),
                split: split_of(signer),
                signer_id: Some(format!("signer_{class_id}_{signer}")),
            });
        }
    }
    let manifest = Manifest {
        entries,
        base_dir: out.to_owned(),
    };
    manifest.save(&out.join("manifest.csv"))?;
    Ok(manifest)
}

#[derive(Debug, Error, PartialEq)]
pub enum ClassifierError {
    #[error("record `{0}` has no label")]
    Unlabelled(String),
    #[error("need at least 2 training classes, found {0}")]
    TooFewClasses(usize),
    #[error("test class `{0}` is absent from training")]
    UnknownClass(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub accuracy: f64,
    pub predictions: Vec<String>,
}

type Matrix = Vec<[f64; FEATURE_COUNT]>;

fn label(r: &VideoFeatureRecord) -> Result<&str, ClassifierError> {
    r.label
        .as_deref()
        .ok_or_else(|| ClassifierError::Unlabelled(r.video_id.clone()))
}

/// Per-class mean matrices; each slot averages only non-padded rows and
/// is zero when no training row covers it.
pub fn class_means(
    train: &[VideoFeatureRecord],
) -> Result<BTreeMap<String, Matrix>, ClassifierError> {
    let mut sums: BTreeMap<String, (Matrix, Vec<usize>)> = BTreeMap::new();
    for r in train {
        let rows = r.features.len();
        let (sum, count) = sums
            .entry(label(r)?.to_owned())
            .or_insert_with(|| (vec![[0.0; FEATURE_COUNT]; rows], vec![0; rows]));
        for (k, row) in r.features.iter().enumerate().take(sum.len()) {
            if r.padding_mask[k] {
                continue;
            }
            count[k] += 1;
            for (s, &v) in sum[k].iter_mut().zip(row) {
                *s += f64::from(v);
            }
        }
    }
    Ok(sums
        .into_iter()
        .map(|(l, (mut sum, count))| {
            for (row, &n) in sum.iter_mut().zip(&count) {
                if n > 0 {
                    row.iter_mut().for_each(|v| *v /= n as f64);
                }
            }
            (l, sum)
        })
        .collect())
}

/// Squared Frobenius distance over the record's non-padded rows.
fn distance(r: &VideoFeatureRecord, mean: &Matrix) -> f64 {
    r.features
        .iter()
        .zip(&r.padding_mask)
        .zip(mean)
        .filter(|((_, &pad), _)| !pad)
        .map(|((row, _), m)| {
            row.iter()
                .zip(m)
                .map(|(&a, b)| (f64::from(a) - b).powi(2))
                .sum::<f64>()
        })
        .sum()
}

/// Nearest class mean for each test record; ties go to the first label
/// in sorted order.
pub fn eval_nearest_mean(
    train: &[VideoFeatureRecord],
    test: &[VideoFeatureRecord],
) -> Result<Evaluation, ClassifierError> {
    let means = class_means(train)?;
    if means.len() < 2 {
        return Err(ClassifierError::TooFewClasses(means.len()));
    }
    let mut correct = 0;
    let mut predictions = Vec::with_capacity(test.len());
    for r in test {
        let truth = label(r)?;
        if !means.contains_key(truth) {
            return Err(ClassifierError::UnknownClass(truth.to_owned()));
        }
        let mut best: Option<(&str, f64)> = None;
        for (l, m) in &means {
            let d = distance(r, m);
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((l, d));
            }
        }
        let pred = best.expect("at least two classes").0;
        correct += usize::from(pred == truth);
        predictions.push(pred.to_owned());
    }
    let accuracy = if test.is_empty() {
        0.0
    } else {
        correct as f64 / test.len() as f64
    };
    Ok(Evaluation {
        accuracy,
        predictions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_are_valid() {
        for c in 0..5 {
            builtin_template(c, 0.01).unwrap().validate().unwrap();
        }
        assert!(builtin_template(5, 0.01).is_none());
    }

    #[test]
    fn validation_catches_bad_templates() {
        let mut t = builtin_template(0, 0.0).unwrap();
        t.duration_frames = 10;
        assert_eq!(t.validate(), Err(SynthError::TooShort("bilateral_circle")));
        let mut t = builtin_template(1, 0.0).unwrap();
        t.hand2 = Trajectory::Static(p(0.99, 0.5));
        assert!(matches!(t.validate(), Err(SynthError::OutOfRange { .. })));
        assert!(matches!(
            builtin_template(1, -1.0).unwrap().validate(),
            Err(SynthError::Parameters(_))
        ));
    }

    #[test]
    fn generation_is_deterministic() {
        let t = builtin_template(2, 0.01).unwrap();
        assert_eq!(generate(&t, "v", 9), generate(&t, "v", 9));
        assert_ne!(generate(&t, "v", 9), generate(&t, "v", 10));
    }

    #[test]
    fn boxes_and_scores_in_range() {
        let mut t = builtin_template(3, 0.05).unwrap();
        t.dropout = 0.3;
        let frames = generate(&t, "v", 1);
        assert_eq!(frames.len(), 48);
        let mut dropped = 0;
        for f in &frames {
            dropped += 3 - f.detections.len();
            for d in &f.detections {
                assert!((0.7..=0.99).contains(&d.score));
                assert!(
                    (d.bbox.width() - BOX_SIZE).abs() < 1e-12
                        && (d.bbox.height() - BOX_SIZE).abs() < 1e-12
                );
                assert!(d.bbox.x_min >= 0.0 && d.bbox.y_max <= 1.0);
            }
        }
        assert!(dropped > 0 && dropped < 48);
    }

    #[test]
    fn hold_then_moves() {
        let t = Trajectory::Hold {
            until: 0.5,
            then: Box::new(Trajectory::Linear {
                from: p(0.0, 0.0),
                to: p(1.0, 0.0),
            }),
        };
        assert_eq!(t.at(0.3), p(0.0, 0.0));
        assert_eq!(t.at(0.75), p(0.5, 0.0));
        assert_eq!(t.at(1.0), p(1.0, 0.0));
    }

    fn rec(label: &str, rows: Vec<[f32; FEATURE_COUNT]>, mask: Vec<bool>) -> VideoFeatureRecord {
        VideoFeatureRecord {
            video_id: label.into(),
            label: Some(label.into()),
            dominant: crate::tracker::HandId::Hand1,
            features: rows,
            padding_mask: mask,
            selected_indices: vec![],
            step_used: 1,
            valid: true,
            invalid_reason: None,
            rejected: Default::default(),
            warnings: Default::default(),
        }
    }

    #[test]
    fn classifier_basics() {
        let a = rec("a", vec![[0.0; 13], [0.0; 13]], vec![false, false]);
        let b = rec("b", vec![[1.0; 13], [1.0; 13]], vec![false, false]);
        let train = vec![a.clone(), b.clone()];
        let e = eval_nearest_mean(&train, &train).unwrap();
        assert_eq!(e.accuracy, 1.0);
        assert_eq!(e.predictions, ["a", "b"]);

        // padded rows are ignored on both sides
        let padded_b = rec("b", vec![[1.0; 13], [0.0; 13]], vec![false, true]);
        let means = class_means(&[a.clone(), padded_b.clone()]).unwrap();
        assert_eq!(means["b"][1], [0.0; 13]);
        assert_eq!(
            eval_nearest_mean(&[a.clone(), b.clone()], &[padded_b])
                .unwrap()
                .accuracy,
            1.0
        );

        assert_eq!(
            eval_nearest_mean(std::slice::from_ref(&a), std::slice::from_ref(&a)),
            Err(ClassifierError::TooFewClasses(1))
        );
        let c = rec("c", vec![[0.0; 13], [0.0; 13]], vec![false, false]);
        assert_eq!(
            eval_nearest_mean(&train, &[c]),
            Err(ClassifierError::UnknownClass("c".into()))
        );
    }
}
