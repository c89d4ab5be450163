#![allow(dead_code)]

pub mod reference_sampler;

use handtri::{Centroid, TrackedFrame};
use rand::Rng;

/// Piecewise video: static, slow and fast segments of random lengths.
pub fn random_video(rng: &mut impl Rng, len: usize) -> Vec<[f64; 6]> {
    let mut cur: [f64; 6] = std::array::from_fn(|_| rng.random_range(0.1..0.9));
    let mut out = Vec::with_capacity(len);
    let mut left = 0;
    let mut speed = 0.0;
    for _ in 0..len {
        if left == 0 {
            left = rng.random_range(1..20);
            // per-frame drift in pixels of a 512 frame: still, below eta_hat,
            // between the thresholds, fast
            speed = [0.0, 2.0, 7.0, 25.0][rng.random_range(0..4)] / 512.0;
        }
        left -= 1;
        for v in cur.iter_mut().take(4) {
            *v = (*v + rng.random_range(-1.0..1.0) * speed).clamp(0.0, 1.0);
        }
        out.push(cur);
    }
    out
}

pub fn to_tracked(frames: &[[f64; 6]]) -> Vec<TrackedFrame<f64>> {
    frames
        .iter()
        .enumerate()
        .map(|(i, f)| TrackedFrame {
            frame_index: i as u64,
            hand1: Centroid::new(f[0], f[1]),
            hand2: Centroid::new(f[2], f[3]),
            face: Centroid::new(f[4], f[5]),
            face_carried: false,
            hand1_carried: false,
            hand2_carried: false,
        })
        .collect()
}
