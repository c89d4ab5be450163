//! Detector output types, the JSON-lines frame format, confidence
//! filtering, box expansion and centroids.
//!
//! All geometry is in normalized image coordinates, origin top-left.
//! Pixel-valued records are converted at ingestion.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

/// Coordinates above this value mark a record as pixel-valued.
pub const PIXEL_DETECT_LIMIT: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Centroid<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Centroid<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn zero() -> Self {
        Self {
            x: T::zero(),
            y: T::zero(),
        }
    }

    /// Euclidean distance.
    pub fn dist(&self, other: &Self) -> T {
        (other.x - self.x).hypot(other.y - self.y)
    }

    pub fn cast<U: Scalar>(&self) -> Centroid<U> {
        Centroid {
            x: U::lit(self.x.as_f64()),
            y: U::lit(self.y.as_f64()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BoundingBox<T> {
    pub x_min: T,
    pub y_min: T,
    pub x_max: T,
    pub y_max: T,
}

impl<T: Scalar> BoundingBox<T> {
    pub fn new(x_min: T, y_min: T, x_max: T, y_max: T) -> Self {
        Self {
            x_min,
            y_min,
            x_max,
            y_max,
        }
    }

    pub fn width(&self) -> T {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> T {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> T {
        self.width() * self.height()
    }

    pub fn contains(&self, other: &Self) -> bool {
        self.x_min <= other.x_min
            && self.y_min <= other.y_min
            && self.x_max >= other.x_max
            && self.y_max >= other.y_max
    }

    /// Clamps every coordinate into `[0, 1]`, returning how many moved.
    pub fn clamp_unit(&mut self) -> u32 {
        let mut moved = 0;
        for v in [
            &mut self.x_min,
            &mut self.y_min,
            &mut self.x_max,
            &mut self.y_max,
        ] {
            let c = v.max(T::zero()).min(T::one());
            if c != *v {
                *v = c;
                moved += 1;
            }
        }
        moved
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassLabel {
    Face,
    Hand,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection<T> {
    pub class: ClassLabel,
    pub score: T,
    pub bbox: BoundingBox<T>,
}

/// One frame of one video's detector output.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameDetections {
    pub video_id: String,
    pub frame_index: u64,
    pub detections: Vec<Detection<f64>>,
}

/// A parsed frame plus the number of coordinates clamped into `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedFrame {
    pub frame: FrameDetections,
    pub clamped: u32,
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: malformed record: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("line {line}: field `{field}`: {reason}")]
    InvalidField {
        line: usize,
        field: String,
        reason: String,
    },
    #[error("line {line}: unknown class label `{label}` in `{field}`")]
    UnknownClass {
        line: usize,
        field: String,
        label: String,
    },
}

impl ParseError {
    pub fn line(&self) -> usize {
        match self {
            ParseError::Json { line, .. }
            | ParseError::InvalidField { line, .. }
            | ParseError::UnknownClass { line, .. } => *line,
        }
    }
}

#[derive(Debug, Deserialize, Serialize)]
struct RawFrame {
    video_id: String,
    frame_index: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    frame_size: Option<[f64; 2]>,
    detections: Vec<RawDetection>,
}

#[derive(Debug, Deserialize, Serialize)]
struct RawDetection {
    class: String,
    score: f64,
    bbox: [f64; 4],
}

/// Parsing knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParseOptions {
    /// Used to normalize pixel-valued records that carry no `frame_size`.
    pub fallback_frame_size: [f64; 2],
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self {
            fallback_frame_size: [512.0, 512.0],
        }
    }
}

/// Parses one JSON-lines record. `line` is 1-based and only used in errors.
pub fn parse_frame(text: &str, line: usize) -> Result<ParsedFrame, ParseError> {
    parse_frame_with(text, line, &ParseOptions::default())
}

pub fn parse_frame_with(
    text: &str,
    line: usize,
    opts: &ParseOptions,
) -> Result<ParsedFrame, ParseError> {
    let raw: RawFrame =
        serde_json::from_str(text).map_err(|source| ParseError::Json { line, source })?;
    let invalid = |field: String, reason: String| ParseError::InvalidField {
        line,
        field,
        reason,
    };

    let pixel_valued = raw
        .detections
        .iter()
        .flat_map(|d| d.bbox.iter())
        .any(|&v| v > PIXEL_DETECT_LIMIT);
    let [w, h] = raw.frame_size.unwrap_or(opts.fallback_frame_size);
    if pixel_valued && !(w.is_finite() && h.is_finite() && w > 0.0 && h > 0.0) {
        return Err(invalid(
            "frame_size".into(),
            format!("must be positive, got [{w}, {h}]"),
        ));
    }

    let mut clamped = 0;
    let mut detections = Vec::with_capacity(raw.detections.len());
    for (i, d) in raw.detections.into_iter().enumerate() {
        let class = match d.class.as_str() {
            "face" => ClassLabel::Face,
            "hand" => ClassLabel::Hand,
            _ => {
                return Err(ParseError::UnknownClass {
                    line,
                    field: format!("detections[{i}].class"),
                    label: d.class,
                })
            }
        };
        if !(d.score.is_finite() && (0.0..=1.0).contains(&d.score)) {
            return Err(invalid(
                format!("detections[{i}].score"),
                format!("must lie in [0, 1], got {}", d.score),
            ));
        }
        let [mut x0, mut y0, mut x1, mut y1] = d.bbox;
        if d.bbox.iter().any(|v| !v.is_finite()) {
            return Err(invalid(
                format!("detections[{i}].bbox"),
                "non-finite coordinate".into(),
            ));
        }
        if pixel_valued {
            x0 /= w;
            x1 /= w;
            y0 /= h;
            y1 /= h;
        }
        if x1 < x0 || y1 < y0 {
            return Err(invalid(
                format!("detections[{i}].bbox"),
                format!("max below min in {:?}", d.bbox),
            ));
        }
        let mut bbox = BoundingBox::new(x0, y0, x1, y1);
        clamped += bbox.clamp_unit();
        detections.push(Detection {
            class,
            score: d.score,
            bbox,
        });
    }

    Ok(ParsedFrame {
        frame: FrameDetections {
            video_id: raw.video_id,
            frame_index: raw.frame_index,
            detections,
        },
        clamped,
    })
}

impl FrameDetections {
    /// Serializes as one normalized JSON-lines record (no trailing newline).
    pub fn to_json_line(&self) -> String {
        let raw = RawFrame {
            video_id: self.video_id.clone(),
            frame_index: self.frame_index,
            frame_size: None,
            detections: self
                .detections
                .iter()
                .map(|d| RawDetection {
                    class: match d.class {
                        ClassLabel::Face => "face".into(),
                        ClassLabel::Hand => "hand".into(),
                    },
                    score: d.score,
                    bbox: [d.bbox.x_min, d.bbox.y_min, d.bbox.x_max, d.bbox.y_max],
                })
                .collect(),
        };
        serde_json::to_string(&raw).expect("frame record serializes")
    }
}

/// Highest-scoring face and up to two highest-scoring hands.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection<T> {
    pub face: Option<Detection<T>>,
    pub hands: Vec<Detection<T>>,
}

/// Drops detections scoring below `threshold`, then keeps the best face and
/// the two best hands. Equal scores keep input order.
pub fn select_detections<T: Scalar>(detections: &[Detection<T>], threshold: T) -> Selection<T> {
    let mut kept: Vec<&Detection<T>> = detections.iter().filter(|d| d.score >= threshold).collect();
    // stable: ties stay in input order
    kept.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let face = kept
        .iter()
        .find(|d| d.class == ClassLabel::Face)
        .map(|d| **d);
    let hands = kept
        .iter()
        .filter(|d| d.class == ClassLabel::Hand)
        .take(2)
        .map(|d| **d)
        .collect();
    Selection { face, hands }
}

/// Grows the box area by `area_factor` about its center (each side scaled
/// by the square root), then clamps into `[0, 1]`. Zero-area boxes are
/// returned unchanged.
pub fn expand_box<T: Scalar>(bbox: BoundingBox<T>, area_factor: T) -> BoundingBox<T> {
    debug_assert!(area_factor >= T::one(), "area factor below 1");
    if area_factor == T::one() || bbox.width() <= T::zero() || bbox.height() <= T::zero() {
        return bbox;
    }
    let two = T::lit(2.0);
    let side = area_factor.sqrt();
    let cx = (bbox.x_min + bbox.x_max) / two;
    let cy = (bbox.y_min + bbox.y_max) / two;
    let hw = bbox.width() / two * side;
    let hh = bbox.height() / two * side;
    let mut out = BoundingBox::new(cx - hw, cy - hh, cx + hw, cy + hh);
    out.clamp_unit();
    out
}

pub fn centroid<T: Scalar>(bbox: &BoundingBox<T>) -> Centroid<T> {
    let two = T::lit(2.0);
    Centroid::new(
        (bbox.x_min + bbox.x_max) / two,
        (bbox.y_min + bbox.y_max) / two,
    )
}
