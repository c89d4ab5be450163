//! Triangle figures: black background, white filled triangle, and colored
//! markers for the face (green circle), dominant hand (red square) and
//! non-dominant hand (blue upward triangle).
//!
//! Vertices are snapped to a 1/16 pixel grid and filled with an exact
//! integer scanline rule (pixel centers on or inside all three edges), so
//! the filled set is reproducible bit for bit. No anti-aliasing.

use std::io::Cursor;
use std::path::Path;

use thiserror::Error;

use crate::detection::Centroid;
use crate::scalar::Scalar;
use crate::tracker::{HandId, TrackedFrame};

/// Sub-pixel steps per pixel for vertex snapping.
pub const SUBPIXEL: i64 = 16;

pub type Rgb = [u8; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FigureSpec {
    pub width: u32,
    pub height: u32,
    pub marker_radius: u32,
    pub background: Rgb,
    pub fill: Rgb,
    pub face: Rgb,
    pub dominant: Rgb,
    pub nondominant: Rgb,
}

impl Default for FigureSpec {
    fn default() -> Self {
        Self {
            width: 128,
            height: 128,
            marker_radius: 8,
            background: [0, 0, 0],
            fill: [255, 255, 255],
            face: [0, 255, 0],
            dominant: [255, 0, 0],
            nondominant: [0, 0, 255],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FigureImage {
    pub width: u32,
    pub height: u32,
    /// Row-major RGB8.
    pub pixels: Vec<u8>,
}

impl FigureImage {
    pub fn new(width: u32, height: u32, color: Rgb) -> Self {
        let pixels = color
            .iter()
            .copied()
            .cycle()
            .take((width * height * 3) as usize)
            .collect();
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn get(&self, x: u32, y: u32) -> Rgb {
        let i = ((y * self.width + x) * 3) as usize;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn put(&mut self, x: u32, y: u32, c: Rgb) {
        let i = ((y * self.width + x) * 3) as usize;
        self.pixels[i..i + 3].copy_from_slice(&c);
    }

    pub fn count(&self, c: Rgb) -> usize {
        self.pixels.chunks_exact(3).filter(|p| *p == c).count()
    }

    fn put_clipped(&mut self, x: i64, y: i64, c: Rgb) {
        if x >= 0 && y >= 0 && x < self.width as i64 && y < self.height as i64 {
            self.put(x as u32, y as u32, c);
        }
    }
}

/// Snaps a normalized coordinate onto the sub-pixel grid of an axis with
/// `size` pixels (pixel centers at integers, `0 -> 0`, `1 -> size - 1`).
pub fn snap<T: Scalar>(v: T, size: u32) -> i64 {
    (v.as_f64() * f64::from(size - 1) * SUBPIXEL as f64).round() as i64
}

fn snap_point<T: Scalar>(p: &Centroid<T>, spec: &FigureSpec) -> (i64, i64) {
    (snap(p.x, spec.width), snap(p.y, spec.height))
}

/// Inclusive pixel span `[lo, hi]` of every row covered by the triangle.
/// Rows outside the image are skipped; spans are clipped to the image.
fn fill_spans(mut v: [(i64, i64); 3], width: u32, height: u32) -> Vec<(i64, i64, i64)> {
    let area2 = (v[1].0 - v[0].0) * (v[2].1 - v[0].1) - (v[1].1 - v[0].1) * (v[2].0 - v[0].0);
    if area2 == 0 {
        return Vec::new();
    }
    if area2 < 0 {
        v.swap(1, 2);
    }
    let edges = [(v[0], v[1]), (v[1], v[2]), (v[2], v[0])];
    let y_lo = v
        .iter()
        .map(|p| p.1)
        .min()
        .unwrap()
        .div_euclid(SUBPIXEL)
        .max(0);
    let y_hi = v
        .iter()
        .map(|p| p.1)
        .max()
        .unwrap()
        .div_euclid(SUBPIXEL)
        .min(height as i64 - 1);

    let mut spans = Vec::new();
    for py in y_lo..=y_hi {
        let row = py * SUBPIXEL;
        let (mut lo, mut hi) = (0i64, width as i64 - 1);
        for &(a, b) in &edges {
            // inside: (b.x - a.x)(Y - a.y) - (b.y - a.y)(X - a.x) >= 0
            let k = (b.0 - a.0) * (row - a.1);
            let dy = b.1 - a.1;
            if dy > 0 {
                let x_max = a.0 + k.div_euclid(dy);
                hi = hi.min(x_max.div_euclid(SUBPIXEL));
            } else if dy < 0 {
                let x_min = a.0 - k.div_euclid(-dy);
                lo = lo.max(-(-x_min).div_euclid(SUBPIXEL));
            } else if k < 0 {
                hi = -1;
            }
        }
        if lo <= hi {
            spans.push((py, lo, hi));
        }
    }
    spans
}

enum Marker {
    Circle,
    Square,
    UpTriangle,
}

fn draw_marker(img: &mut FigureImage, center: (i64, i64), r: i64, shape: Marker, color: Rgb) {
    let (cx, cy) = (
        (center.0 + SUBPIXEL / 2).div_euclid(SUBPIXEL),
        (center.1 + SUBPIXEL / 2).div_euclid(SUBPIXEL),
    );
    for dy in -r..=r {
        for dx in -r..=r {
            let hit = match shape {
                Marker::Circle => dx * dx + dy * dy <= r * r,
                Marker::Square => true,
                Marker::UpTriangle => 2 * dx.abs() <= dy + r,
            };
            if hit {
                img.put_clipped(cx + dx, cy + dy, color);
            }
        }
    }
}

/// Renders one frame. Padding frames give an all-background image.
pub fn render_figure<T: Scalar>(
    frame: &TrackedFrame<T>,
    dominant: HandId,
    spec: &FigureSpec,
) -> FigureImage {
    let mut img = FigureImage::new(spec.width, spec.height, spec.background);
    if frame.is_padding() {
        return img;
    }
    let face = snap_point(&frame.face, spec);
    let dom = snap_point(&frame.hand(dominant), spec);
    let other = snap_point(&frame.hand(dominant.other()), spec);

    for (y, lo, hi) in fill_spans([face, dom, other], spec.width, spec.height) {
        for x in lo..=hi {
            img.put(x as u32, y as u32, spec.fill);
        }
    }
    let r = spec.marker_radius as i64;
    draw_marker(&mut img, other, r, Marker::UpTriangle, spec.nondominant);
    draw_marker(&mut img, dom, r, Marker::Square, spec.dominant);
    draw_marker(&mut img, face, r, Marker::Circle, spec.face);
    img
}

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("png encoding failed: {0}")]
    Encode(#[from] png::EncodingError),
    #[error("png decoding failed: {0}")]
    Decode(#[from] png::DecodingError),
    #[error("unsupported png layout: {0}")]
    Layout(String),
    #[error("writing {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Lossless 8-bit RGB PNG.
pub fn encode_png(img: &FigureImage) -> Result<Vec<u8>, RasterError> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, img.width, img.height);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header()?;
        writer.write_image_data(&img.pixels)?;
        writer.finish()?;
    }
    Ok(out)
}

pub fn decode_png(bytes: &[u8]) -> Result<FigureImage, RasterError> {
    let decoder = png::Decoder::new(Cursor::new(bytes));
    let mut reader = decoder.read_info()?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| RasterError::Layout("image too large".into()))?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf)?;
    if info.color_type != png::ColorType::Rgb || info.bit_depth != png::BitDepth::Eight {
        return Err(RasterError::Layout(format!(
            "{:?} {:?}",
            info.color_type, info.bit_depth
        )));
    }
    buf.truncate(info.buffer_size());
    Ok(FigureImage {
        width: info.width,
        height: info.height,
        pixels: buf,
    })
}

pub fn write_png(img: &FigureImage, path: &Path) -> Result<(), RasterError> {
    let bytes = encode_png(img)?;
    std::fs::write(path, bytes).map_err(|source| RasterError::Io {
        path: path.display().to_string(),
        source,
    })
}
