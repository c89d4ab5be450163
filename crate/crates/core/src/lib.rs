//! Triangle features and triangle figures for sign-language video.
//!
//! The crate turns per-frame face/hand detections into a fixed-length
//! sequence of 13-value geometric descriptors of the face-hands triangle,
//! plus optional rasterized triangle figures:
//!
//! 1. [`detection`]: parse, confidence-filter, expand boxes, take centroids.
//! 2. [`tracker`]: stable hand identities, gap filling, frame rejection.
//! 3. [`sampler`]: step subsampling with resting-pose and slow-transition
//!    filters, restarts, zero-padding and validity.
//! 4. [`features`]: the normalized 13-value triangle descriptor.
//! 5. [`raster`]: 128x128 triangle figures and PNG encoding.
//! 6. [`pipeline`], [`manifest`], [`output`], [`batch`]: per-video
//!    orchestration, dataset manifests, file formats, batch runs, latency
//!    benchmark.
//! 7. [`synth`]: synthetic gesture streams and a nearest-mean classifier.
//!
//! Geometry is generic over [`Scalar`] (`f32`/`f64`); the aliases below fix
//! the common instantiations.

pub mod batch;
pub mod detection;
pub mod features;
pub mod manifest;
pub mod output;
pub mod pipeline;
pub mod raster;
pub mod sampler;
pub mod scalar;
pub mod synth;
pub mod tracker;

pub use detection::{
    centroid, expand_box, parse_frame, parse_frame_with, select_detections, BoundingBox, Centroid,
    ClassLabel, Detection, FrameDetections, ParseError, ParseOptions, ParsedFrame, Selection,
};
pub use features::{
    feature_vector, TriangleFeatures, TriangleGeometry, FEATURE_COUNT, FEATURE_NAMES,
};
pub use pipeline::{process_video, InvalidReason, VideoFeatureRecord, VideoOutput, VideoStream};
pub use raster::{encode_png, render_figure, FigureImage, FigureSpec};
pub use sampler::{compute_step, movement_series, sample_video, SampledVideo, SamplerConfig};
pub use scalar::{Scalar, GAMMA};
pub use tracker::{HandId, RejectCounts, RejectReason, TrackState, TrackedFrame};

pub type CentroidF64 = Centroid<f64>;
pub type CentroidF32 = Centroid<f32>;
pub type BoundingBoxF64 = BoundingBox<f64>;
pub type BoundingBoxF32 = BoundingBox<f32>;
pub type TrackedFrameF64 = TrackedFrame<f64>;
pub type TrackedFrameF32 = TrackedFrame<f32>;
pub type TriangleFeaturesF64 = TriangleFeatures<f64>;
pub type TriangleFeaturesF32 = TriangleFeatures<f32>;
pub type SampledVideoF64 = SampledVideo<f64>;
