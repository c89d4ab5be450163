//! Straight-line reference of the frame selection procedure, written
//! without any of the crate's sampler code. Frames are plain
//! `[h1x, h1y, h2x, h2y, fx, fy]` arrays.

pub struct RefParams {
    pub target: usize,
    pub eta_px: f64,
    pub eta_hat_px: f64,
    pub frame_px: f64,
    pub max_padded: usize,
}

impl Default for RefParams {
    fn default() -> Self {
        RefParams {
            target: 16,
            eta_px: 10.0,
            eta_hat_px: 5.0,
            frame_px: 512.0,
            max_padded: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefResult {
    /// Positions (into the input slice) of the chosen frames.
    pub chosen: Vec<usize>,
    pub step: usize,
    pub padded: usize,
    pub valid: bool,
    /// 1 or 2.
    pub dominant: u8,
    /// Per chosen frame, |change| of each hand's face distance since the
    /// previous chosen frame (0 for the first).
    pub moves: Vec<(f64, f64)>,
}

fn hand_face(f: &[f64; 6]) -> (f64, f64) {
    let a = ((f[0] - f[4]).powi(2) + (f[1] - f[5]).powi(2)).sqrt();
    let b = ((f[2] - f[4]).powi(2) + (f[3] - f[5]).powi(2)).sqrt();
    (a, b)
}

pub fn reference_select(frames: &[[f64; 6]], p: &RefParams) -> RefResult {
    let n = frames.len();
    let mut step = if n / p.target == 0 { 1 } else { n / p.target };
    let mut chosen: Vec<usize>;
    loop {
        chosen = Vec::new();
        let mut last_rho: Option<f64> = None;
        let mut resting = true;
        let mut motion: Vec<f64> = Vec::new();
        let mut visit_no = 0usize;
        let mut i = 0usize;
        while i < n && chosen.len() < p.target {
            let (a, b) = hand_face(&frames[i]);
            let rho = a + b;
            if let Some(prev) = last_rho {
                let mu = (rho - prev).abs() * p.frame_px;
                if resting {
                    if mu > p.eta_px {
                        resting = false;
                        motion.push(mu);
                        if visit_no == 1 {
                            // motion from the very first frame: that frame
                            // is not a resting pose either
                            chosen.push(i - step);
                        }
                        if chosen.len() < p.target {
                            chosen.push(i);
                        }
                    }
                } else {
                    motion.push(mu);
                    let k = motion.len();
                    let slow = k >= 3
                        && motion[k - 1] < p.eta_hat_px
                        && motion[k - 2] < p.eta_hat_px
                        && motion[k - 3] < p.eta_hat_px;
                    if !slow {
                        chosen.push(i);
                    }
                }
            }
            last_rho = Some(rho);
            visit_no += 1;
            i += step;
        }
        if chosen.len() >= p.target || step == 1 {
            break;
        }
        step -= 1;
    }

    let mut moves = Vec::new();
    let mut tot1 = 0.0;
    let mut tot2 = 0.0;
    for (j, &idx) in chosen.iter().enumerate() {
        if j == 0 {
            moves.push((0.0, 0.0));
        } else {
            let (a0, b0) = hand_face(&frames[chosen[j - 1]]);
            let (a1, b1) = hand_face(&frames[idx]);
            moves.push(((a1 - a0).abs(), (b1 - b0).abs()));
            tot1 += (a1 - a0).abs();
            tot2 += (b1 - b0).abs();
        }
    }
    let padded = p.target - chosen.len();
    RefResult {
        step,
        padded,
        valid: padded <= p.max_padded,
        dominant: if tot2 > tot1 { 2 } else { 1 },
        moves,
        chosen,
    }
}
