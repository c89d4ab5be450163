use handtri::raster::{render_figure, FigureSpec, SUBPIXEL};
use handtri::{encode_png, Centroid, HandId, TrackedFrame};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn frame(p: [f64; 6]) -> TrackedFrame<f64> {
    TrackedFrame {
        frame_index: 0,
        hand1: Centroid::new(p[0], p[1]),
        hand2: Centroid::new(p[2], p[3]),
        face: Centroid::new(p[4], p[5]),
        face_carried: false,
        hand1_carried: false,
        hand2_carried: false,
    }
}

fn snapped(v: f64) -> i64 {
    (v * 127.0 * 16.0).round() as i64
}

fn inside(t: &[(i64, i64); 3], x: i64, y: i64) -> bool {
    let cross = |a: (i64, i64), b: (i64, i64)| (b.0 - a.0) * (y - a.1) - (b.1 - a.1) * (x - a.0);
    let area = (t[1].0 - t[0].0) * (t[2].1 - t[0].1) - (t[1].1 - t[0].1) * (t[2].0 - t[0].0);
    if area == 0 {
        return false;
    }
    let e = [cross(t[0], t[1]), cross(t[1], t[2]), cross(t[2], t[0])];
    e.iter().all(|&v| v >= 0) || e.iter().all(|&v| v <= 0)
}

fn near_marker(centers: &[(i64, i64)], x: i64, y: i64, r: i64) -> bool {
    centers.iter().any(|&(cx, cy)| {
        let (px, py) = ((cx + 8).div_euclid(16), (cy + 8).div_euclid(16));
        (x - px).abs() <= r && (y - py).abs() <= r
    })
}

fn check(p: [f64; 6]) {
    let spec = FigureSpec::default();
    let img = render_figure(&frame(p), HandId::Hand1, &spec);
    let verts = [
        (snapped(p[0]), snapped(p[1])),
        (snapped(p[2]), snapped(p[3])),
        (snapped(p[4]), snapped(p[5])),
    ];
    let r = spec.marker_radius as i64;
    for y in 0..128i64 {
        for x in 0..128i64 {
            let white = img.get(x as u32, y as u32) == spec.fill;
            let want = inside(&verts, x * SUBPIXEL, y * SUBPIXEL);
            if near_marker(&verts, x, y, r) {
                assert!(!white || want, "({x},{y}) {p:?}");
            } else {
                assert_eq!(white, want, "({x},{y}) {p:?}");
            }
        }
    }
}

#[test]
fn fill_matches_point_in_triangle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        check(std::array::from_fn(|_| rng.random_range(0.0..=1.0)));
    }
}

#[test]
fn thin_and_degenerate_triangles() {
    check([0.1, 0.1, 0.9, 0.9, 0.5, 0.5]);
    check([0.1, 0.1, 0.9, 0.9, 0.5, 0.51]);
    check([0.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
    check([0.2, 0.7, 0.2, 0.7, 0.2, 0.7]);
    check([0.3, 0.2, 0.3, 0.9, 0.31, 0.5]);
}

#[test]
fn encoded_bytes_repeat() {
    let f = frame([0.2, 0.8, 0.8, 0.8, 0.5, 0.2]);
    let a = encode_png(&render_figure(&f, HandId::Hand2, &FigureSpec::default())).unwrap();
    let b = encode_png(&render_figure(&f, HandId::Hand2, &FigureSpec::default())).unwrap();
    assert_eq!(a, b);
}
