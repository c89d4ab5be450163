//! The 13-value triangle descriptor.
//!
//! Vertices are the dominant hand (`rh`), the other hand (`lh`) and the
//! face (`fc`). Side order is `[rh-lh, rh-fc, lh-fc]`; angle order follows
//! the vertices `[rh, lh, fc]`, each angle sitting opposite the side that
//! does not touch its vertex.
//!
//! Output layout, frozen:
//!
//! | slots | value                                  |
//! |-------|----------------------------------------|
//! | 0..3  | sides / perimeter                      |
//! | 3..6  | internal angles / pi                   |
//! | 6..9  | external angles / 2pi                  |
//! | 9     | height over the hand-hand base / perimeter |
//! | 10    | area / perimeter^2                     |
//! | 11..13| per-hand movement / perimeter          |
//!
//! Every ratio is scale, rotation and translation invariant.

use crate::detection::Centroid;
use crate::scalar::{guarded_div, Scalar};
use crate::tracker::TrackedFrame;

pub const FEATURE_COUNT: usize = 13;

pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "side_rh_lh",
    "side_rh_fc",
    "side_lh_fc",
    "angle_rh",
    "angle_lh",
    "angle_fc",
    "ext_angle_rh",
    "ext_angle_lh",
    "ext_angle_fc",
    "height",
    "area",
    "movement_dominant",
    "movement_nondominant",
];

/// `[dist(rh, lh), dist(rh, fc), dist(lh, fc)]`.
pub fn side_lengths<T: Scalar>(rh: &Centroid<T>, lh: &Centroid<T>, fc: &Centroid<T>) -> [T; 3] {
    [rh.dist(lh), rh.dist(fc), lh.dist(fc)]
}

/// Heron's area from side lengths; zero for degenerate input.
///
/// Evaluated in the cancellation-free ordering (sides sorted descending),
/// which equals `sqrt(s(s-a)(s-b)(s-c))` algebraically.
pub fn heron_area<T: Scalar>(d: &[T; 3]) -> T {
    let mut s = *d;
    s.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    let [a, b, c] = s;
    let p = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    p.max(T::zero()).sqrt() / T::lit(4.0)
}

/// Height over the hand-hand side `d[0]`.
pub fn height<T: Scalar>(area: T, d: &[T; 3]) -> T {
    guarded_div(T::lit(2.0) * area, d[0])
}

fn angle_from_sides<T: Scalar>(adj1: T, adj2: T, opp: T) -> T {
    let cos = guarded_div(
        adj1 * adj1 + adj2 * adj2 - opp * opp,
        T::lit(2.0) * adj1 * adj2,
    );
    cos.max(-T::one()).min(T::one()).acos()
}

/// Internal angles at `[rh, lh, fc]` by the law of cosines.
pub fn internal_angles<T: Scalar>(d: &[T; 3]) -> [T; 3] {
    let [d1, d2, d3] = *d;
    [
        angle_from_sides(d1, d2, d3),
        angle_from_sides(d1, d3, d2),
        angle_from_sides(d2, d3, d1),
    ]
}

/// Each external angle is the sum of the two non-adjacent internal angles.
pub fn external_angles<T: Scalar>(alpha: &[T; 3]) -> [T; 3] {
    let [a, b, c] = *alpha;
    [b + c, a + c, a + b]
}

/// Raw (unnormalized) triangle measurements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleGeometry<T> {
    pub d: [T; 3],
    pub pr: T,
    pub spr: T,
    pub lambda: T,
    pub h: T,
    pub alpha: [T; 3],
    pub alpha_hat: [T; 3],
}

impl<T: Scalar> TriangleGeometry<T> {
    pub fn from_points(rh: &Centroid<T>, lh: &Centroid<T>, fc: &Centroid<T>) -> Self {
        let d = side_lengths(rh, lh, fc);
        let pr = d[0] + d[1] + d[2];
        let lambda = heron_area(&d);
        let alpha = internal_angles(&d);
        Self {
            d,
            pr,
            spr: pr / T::lit(2.0),
            lambda,
            h: height(lambda, &d),
            alpha,
            alpha_hat: external_angles(&alpha),
        }
    }

    /// Perimeter at or below the degeneracy guard.
    pub fn is_degenerate(&self) -> bool {
        self.pr <= T::gamma()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TriangleFeatures<T> {
    pub sides_norm: [T; 3],
    pub internal_norm: [T; 3],
    pub external_norm: [T; 3],
    pub height_norm: T,
    pub area_norm: T,
    pub movement: [T; 2],
}

impl<T: Scalar> TriangleFeatures<T> {
    pub fn zeros() -> Self {
        Self {
            sides_norm: [T::zero(); 3],
            internal_norm: [T::zero(); 3],
            external_norm: [T::zero(); 3],
            height_norm: T::zero(),
            area_norm: T::zero(),
            movement: [T::zero(); 2],
        }
    }

    pub fn to_array(&self) -> [T; FEATURE_COUNT] {
        let mut out = [T::zero(); FEATURE_COUNT];
        out[0..3].copy_from_slice(&self.sides_norm);
        out[3..6].copy_from_slice(&self.internal_norm);
        out[6..9].copy_from_slice(&self.external_norm);
        out[9] = self.height_norm;
        out[10] = self.area_norm;
        out[11..13].copy_from_slice(&self.movement);
        out
    }

    pub fn from_geometry(g: &TriangleGeometry<T>, movement: [T; 2]) -> Self {
        if g.is_degenerate() {
            return Self::zeros();
        }
        let pr = g.pr;
        let pi = T::PI();
        let tau = T::TAU();
        Self {
            sides_norm: g.d.map(|v| guarded_div(v, pr)),
            internal_norm: g.alpha.map(|a| a / pi),
            external_norm: g.alpha_hat.map(|a| a / tau),
            height_norm: guarded_div(g.h, pr),
            area_norm: guarded_div(g.lambda, pr * pr),
            movement: movement.map(|m| guarded_div(m, pr)),
        }
    }
}

/// Features of one frame with `hand1` as `rh` and `hand2` as `lh`.
///
/// Padding frames yield all zeros, as do triangles whose perimeter is
/// within the degeneracy guard.
pub fn feature_vector<T: Scalar>(
    frame: &TrackedFrame<T>,
    mu_h1: T,
    mu_h2: T,
) -> TriangleFeatures<T> {
    if frame.is_padding() {
        return TriangleFeatures::zeros();
    }
    let g = TriangleGeometry::from_points(&frame.hand1, &frame.hand2, &frame.face);
    TriangleFeatures::from_geometry(&g, [mu_h1, mu_h2])
}
