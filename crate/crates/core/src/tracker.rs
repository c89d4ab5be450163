//! Hand identity tracking and gap filling across frames.
//!
//! Hands get a stable identity ("hand 1" / "hand 2") by nearest-centroid
//! association with the previous accepted frame. Missing face or
//! non-dominant hand detections are carried forward from that frame; a
//! missing dominant hand rejects the frame.

use serde::{Deserialize, Serialize};

use crate::detection::{centroid, Centroid, Detection};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum HandId {
    #[default]
    Hand1,
    Hand2,
}

impl HandId {
    pub fn other(self) -> Self {
        match self {
            HandId::Hand1 => HandId::Hand2,
            HandId::Hand2 => HandId::Hand1,
        }
    }
}

/// One frame resolved to a face and two identity-stable hands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackedFrame<T> {
    pub frame_index: u64,
    pub face: Centroid<T>,
    pub hand1: Centroid<T>,
    pub hand2: Centroid<T>,
    pub face_carried: bool,
    pub hand1_carried: bool,
    pub hand2_carried: bool,
}

impl<T: Scalar> TrackedFrame<T> {
    /// Zero-padding placeholder: zero centroids, every flag carried.
    pub fn padding() -> Self {
        Self {
            frame_index: 0,
            face: Centroid::zero(),
            hand1: Centroid::zero(),
            hand2: Centroid::zero(),
            face_carried: true,
            hand1_carried: true,
            hand2_carried: true,
        }
    }

    /// Accepted frames always hold at least one detected hand, so an
    /// all-carried frame can only be padding.
    pub fn is_padding(&self) -> bool {
        self.face_carried && self.hand1_carried && self.hand2_carried
    }

    pub fn hand(&self, id: HandId) -> Centroid<T> {
        match id {
            HandId::Hand1 => self.hand1,
            HandId::Hand2 => self.hand2,
        }
    }

    /// Per-hand distance to the face, `[hand1, hand2]`.
    pub fn face_distances(&self) -> [T; 2] {
        [self.hand1.dist(&self.face), self.hand2.dist(&self.face)]
    }

    /// Copy with the dominant hand moved into the `hand1` slot.
    pub fn oriented(&self, dominant: HandId) -> Self {
        match dominant {
            HandId::Hand1 => *self,
            HandId::Hand2 => Self {
                hand1: self.hand2,
                hand2: self.hand1,
                hand1_carried: self.hand2_carried,
                hand2_carried: self.hand1_carried,
                ..*self
            },
        }
    }

    /// Applies `f` to all three centroids.
    pub fn map_points(&self, f: impl Fn(Centroid<T>) -> Centroid<T>) -> Self {
        Self {
            face: f(self.face),
            hand1: f(self.hand1),
            hand2: f(self.hand2),
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    MissingDominant,
    MissingWithNoHistory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RejectCounts {
    pub missing_dominant: u32,
    pub missing_with_no_history: u32,
}

impl RejectCounts {
    pub fn record(&mut self, reason: RejectReason) {
        match reason {
            RejectReason::MissingDominant => self.missing_dominant += 1,
            RejectReason::MissingWithNoHistory => self.missing_with_no_history += 1,
        }
    }

    pub fn total(&self) -> u32 {
        self.missing_dominant + self.missing_with_no_history
    }

    pub fn add(&mut self, other: &RejectCounts) {
        self.missing_dominant += other.missing_dominant;
        self.missing_with_no_history += other.missing_with_no_history;
    }
}

/// Argmax of cumulative motion; ties go to hand 1.
pub fn dominance_from_motion<T: Scalar>(motion_h1: T, motion_h2: T) -> HandId {
    if motion_h2 > motion_h1 {
        HandId::Hand2
    } else {
        HandId::Hand1
    }
}

/// Per-video tracking state. Strictly sequential within one video.
#[derive(Debug, Clone, Default)]
pub struct TrackState<T> {
    previous: Option<TrackedFrame<T>>,
    position_history_h1: Vec<T>,
    position_history_h2: Vec<T>,
    cumulative_motion_h1: T,
    cumulative_motion_h2: T,
}

impl<T: Scalar> TrackState<T> {
    pub fn new() -> Self {
        Self {
            previous: None,
            position_history_h1: Vec::new(),
            position_history_h2: Vec::new(),
            cumulative_motion_h1: T::zero(),
            cumulative_motion_h2: T::zero(),
        }
    }

    pub fn previous(&self) -> Option<&TrackedFrame<T>> {
        self.previous.as_ref()
    }

    pub fn position_history(&self, id: HandId) -> &[T] {
        match id {
            HandId::Hand1 => &self.position_history_h1,
            HandId::Hand2 => &self.position_history_h2,
        }
    }

    pub fn cumulative_motion(&self) -> [T; 2] {
        [self.cumulative_motion_h1, self.cumulative_motion_h2]
    }

    /// Associates up to two new hand centroids with the identities of the
    /// previous accepted frame.
    pub fn assign_hands(&self, new: &[Centroid<T>]) -> (Option<Centroid<T>>, Option<Centroid<T>>) {
        debug_assert!(new.len() <= 2);
        let Some(prev) = self.previous.as_ref() else {
            return (new.first().copied(), new.get(1).copied());
        };
        match *new {
            [] => (None, None),
            [c] => {
                if c.dist(&prev.hand1) <= c.dist(&prev.hand2) {
                    (Some(c), None)
                } else {
                    (None, Some(c))
                }
            }
            [a, b, ..] => {
                if first_is_hand1(&a, &b, prev) {
                    (Some(a), Some(b))
                } else {
                    (Some(b), Some(a))
                }
            }
        }
    }

    /// Resolves one frame of (already filtered and expanded) detections.
    ///
    /// `dominant` is `None` on the first pass, before dominance is known.
    /// The state only advances when the frame is accepted.
    pub fn resolve_frame(
        &mut self,
        frame_index: u64,
        face: Option<&Detection<T>>,
        hands: &[Detection<T>],
        dominant: Option<HandId>,
    ) -> Result<TrackedFrame<T>, RejectReason> {
        let centroids: Vec<Centroid<T>> = hands.iter().take(2).map(|d| centroid(&d.bbox)).collect();
        let (h1, h2) = self.assign_hands(&centroids);

        if let Some(dom) = dominant {
            let present = match dom {
                HandId::Hand1 => h1.is_some(),
                HandId::Hand2 => h2.is_some(),
            };
            if !present {
                return Err(RejectReason::MissingDominant);
            }
        }
        let prev = self.previous.as_ref();
        if h1.is_none() && h2.is_none() && prev.is_some() {
            // either hand could be the dominant one
            return Err(RejectReason::MissingDominant);
        }

        let fill =
            |cur: Option<Centroid<T>>, pick: fn(&TrackedFrame<T>) -> Centroid<T>| match (cur, prev)
            {
                (Some(c), _) => Ok((c, false)),
                (None, Some(p)) => Ok((pick(p), true)),
                (None, None) => Err(RejectReason::MissingWithNoHistory),
            };
        let (face, face_carried) = fill(face.map(|d| centroid(&d.bbox)), |p| p.face)?;
        let (hand1, hand1_carried) = fill(h1, |p| p.hand1)?;
        let (hand2, hand2_carried) = fill(h2, |p| p.hand2)?;

        let frame = TrackedFrame {
            frame_index,
            face,
            hand1,
            hand2,
            face_carried,
            hand1_carried,
            hand2_carried,
        };
        self.accept(frame);
        Ok(frame)
    }

    fn accept(&mut self, frame: TrackedFrame<T>) {
        let [r1, r2] = frame.face_distances();
        if let (Some(&p1), Some(&p2)) = (
            self.position_history_h1.last(),
            self.position_history_h2.last(),
        ) {
            self.cumulative_motion_h1 = self.cumulative_motion_h1 + (r1 - p1).abs();
            self.cumulative_motion_h2 = self.cumulative_motion_h2 + (r2 - p2).abs();
        }
        self.position_history_h1.push(r1);
        self.position_history_h2.push(r2);
        self.previous = Some(frame);
    }

    /// Dominant identity over every accepted frame so far.
    pub fn resolve_dominance(&self) -> HandId {
        dominance_from_motion(self.cumulative_motion_h1, self.cumulative_motion_h2)
    }
}

/// Nearest to previous hand 1 wins; ties fall back to "farther from
/// previous hand 2", then to coordinate order, so the result never depends
/// on input order.
fn first_is_hand1<T: Scalar>(a: &Centroid<T>, b: &Centroid<T>, prev: &TrackedFrame<T>) -> bool {
    let (da, db) = (a.dist(&prev.hand1), b.dist(&prev.hand1));
    if da != db {
        return da < db;
    }
    let (ea, eb) = (a.dist(&prev.hand2), b.dist(&prev.hand2));
    if ea != eb {
        return ea > eb;
    }
    (a.x, a.y) <= (b.x, b.y)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::detection::{BoundingBox, ClassLabel};

    fn c(x: f64, y: f64) -> Centroid<f64> {
        Centroid::new(x, y)
    }

    fn det_at(class: ClassLabel, x: f64, y: f64) -> Detection<f64> {
        Detection {
            class,
            score: 0.9,
            bbox: BoundingBox::new(x - 0.05, y - 0.05, x + 0.05, y + 0.05),
        }
    }

    fn hand(x: f64, y: f64) -> Detection<f64> {
        det_at(ClassLabel::Hand, x, y)
    }

    fn face() -> Detection<f64> {
        det_at(ClassLabel::Face, 0.5, 0.2)
    }

    fn state_with(h1: Centroid<f64>, h2: Centroid<f64>) -> TrackState<f64> {
        let mut s = TrackState::new();
        s.resolve_frame(
            0,
            Some(&face()),
            &[hand(h1.x, h1.y), hand(h2.x, h2.y)],
            None,
        )
        .unwrap();
        s
    }

    fn close(a: Centroid<f64>, b: Centroid<f64>) -> bool {
        a.dist(&b) < 1e-12
    }

    #[test]
    fn nearest_assignment_unambiguous() {
        let s = state_with(c(0.3, 0.5), c(0.7, 0.5));
        let (h1, h2) = s.assign_hands(&[c(0.31, 0.5), c(0.69, 0.5)]);
        assert_eq!((h1, h2), (Some(c(0.31, 0.5)), Some(c(0.69, 0.5))));
    }

    #[test]
    fn nearest_assignment_is_order_independent() {
        let s = state_with(c(0.3, 0.5), c(0.7, 0.5));
        let (h1, h2) = s.assign_hands(&[c(0.72, 0.5), c(0.28, 0.5)]);
        assert_eq!((h1, h2), (Some(c(0.28, 0.5)), Some(c(0.72, 0.5))));
    }

    #[test]
    fn first_frame_assignment_follows_input_order() {
        let s = TrackState::<f64>::new();
        let (h1, h2) = s.assign_hands(&[c(0.9, 0.9), c(0.1, 0.1)]);
        assert_eq!((h1, h2), (Some(c(0.9, 0.9)), Some(c(0.1, 0.1))));
    }

    #[test]
    fn single_hand_takes_nearer_identity() {
        let s = state_with(c(0.3, 0.5), c(0.7, 0.5));
        assert_eq!(s.assign_hands(&[c(0.65, 0.5)]), (None, Some(c(0.65, 0.5))));
        assert_eq!(s.assign_hands(&[c(0.35, 0.5)]), (Some(c(0.35, 0.5)), None));
    }

    #[test]
    fn missing_face_is_carried_forward() {
        let mut s = state_with(c(0.3, 0.5), c(0.7, 0.5));
        let prev_face = s.previous().unwrap().face;
        let f = s
            .resolve_frame(1, None, &[hand(0.31, 0.5), hand(0.69, 0.5)], None)
            .unwrap();
        assert!(f.face_carried && !f.hand1_carried && !f.hand2_carried);
        assert_eq!(f.face, prev_face);
    }

    #[test]
    fn missing_dominant_rejects_frame() {
        let mut s = state_with(c(0.3, 0.5), c(0.7, 0.5));
        let r = s.resolve_frame(1, Some(&face()), &[hand(0.69, 0.5)], Some(HandId::Hand1));
        assert_eq!(r, Err(RejectReason::MissingDominant));
        // state untouched by the rejection
        assert_eq!(s.previous().unwrap().frame_index, 0);
    }

    #[test]
    fn missing_nondominant_is_carried() {
        let mut s = state_with(c(0.3, 0.5), c(0.7, 0.5));
        let f = s
            .resolve_frame(1, Some(&face()), &[hand(0.69, 0.5)], Some(HandId::Hand2))
            .unwrap();
        assert!(f.hand1_carried && !f.hand2_carried);
        assert!(close(f.hand1, c(0.3, 0.5)));
    }

    #[test]
    fn first_frame_with_one_hand_has_no_history() {
        let mut s = TrackState::<f64>::new();
        let r = s.resolve_frame(0, Some(&face()), &[hand(0.3, 0.5)], None);
        assert_eq!(r, Err(RejectReason::MissingWithNoHistory));
        let r = s.resolve_frame(0, None, &[hand(0.3, 0.5), hand(0.6, 0.5)], None);
        assert_eq!(r, Err(RejectReason::MissingWithNoHistory));
    }

    #[test]
    fn both_hands_missing_is_rejected() {
        let mut s = state_with(c(0.3, 0.5), c(0.7, 0.5));
        assert_eq!(
            s.resolve_frame(1, Some(&face()), &[], None),
            Err(RejectReason::MissingDominant)
        );
    }

    #[test]
    fn dominance_is_argmax_with_hand1_ties() {
        assert_eq!(dominance_from_motion(5.2, 1.1), HandId::Hand1);
        assert_eq!(dominance_from_motion(1.1, 5.2), HandId::Hand2);
        assert_eq!(dominance_from_motion(2.0, 2.0), HandId::Hand1);
        let s = state_with(c(0.3, 0.5), c(0.7, 0.5));
        assert_eq!(s.resolve_dominance(), HandId::Hand1);
    }

    #[test]
    fn cumulative_motion_sums_distance_changes() {
        let mut s = state_with(c(0.5, 0.5), c(0.7, 0.2));
        s.resolve_frame(1, Some(&face()), &[hand(0.5, 0.6), hand(0.7, 0.2)], None)
            .unwrap();
        s.resolve_frame(2, Some(&face()), &[hand(0.5, 0.4), hand(0.7, 0.2)], None)
            .unwrap();
        let [m1, m2] = s.cumulative_motion();
        assert!((m1 - 0.3).abs() < 1e-12, "{m1}");
        assert!(m2.abs() < 1e-12);
        assert_eq!(s.position_history(HandId::Hand1).len(), 3);
        assert_eq!(s.resolve_dominance(), HandId::Hand1);
    }

    proptest! {
        #[test]
        fn assignment_ignores_input_order(
            p in proptest::array::uniform4(0.0..1.0f64),
            n in proptest::array::uniform4(0.0..1.0f64),
        ) {
            let s = state_with(c(p[0], p[1]), c(p[2], p[3]));
            let (a, b) = (c(n[0], n[1]), c(n[2], n[3]));
            prop_assert_eq!(s.assign_hands(&[a, b]), s.assign_hands(&[b, a]));
        }

        #[test]
        fn slow_hands_never_swap(
            start in proptest::array::uniform4(0.2..0.8f64),
            steps in proptest::collection::vec((0.0..std::f64::consts::TAU, 0.0..1.0f64, 0.0..std::f64::consts::TAU, 0.0..1.0f64), 1..40),
            shuffle in proptest::collection::vec(any::<bool>(), 40),
        ) {
            let mut p1 = c(start[0], start[1]);
            let mut p2 = c(start[2], start[3]);
            prop_assume!(p1.dist(&p2) > 0.05);
            let mut s = state_with(p1, p2);
            for (k, (a1, r1, a2, r2)) in steps.iter().enumerate() {
                // each hand moves strictly less than half the current separation
                let lim = 0.49 * p1.dist(&p2) / 2.0;
                let n1 = c(p1.x + lim * r1 * a1.cos(), p1.y + lim * r1 * a1.sin());
                let n2 = c(p2.x + lim * r2 * a2.cos(), p2.y + lim * r2 * a2.sin());
                let hands = if shuffle[k] { [hand(n2.x, n2.y), hand(n1.x, n1.y)] } else { [hand(n1.x, n1.y), hand(n2.x, n2.y)] };
                let f = s.resolve_frame(k as u64 + 1, Some(&face()), &hands, None).unwrap();
                prop_assert!(close(f.hand1, n1) && close(f.hand2, n2));
                p1 = n1;
                p2 = n2;
            }
        }

        #[test]
        fn dominance_is_scale_invariant(
            traj in proptest::collection::vec(proptest::array::uniform4(0.1..0.9f64), 2..20),
            scale in 0.1..1.0f64,
        ) {
            let run = |s: f64| {
                let mut st = TrackState::<f64>::new();
                for (k, t) in traj.iter().enumerate() {
                    let f = det_at(ClassLabel::Face, 0.5 * s, 0.2 * s);
                    let _ = st.resolve_frame(k as u64, Some(&f), &[hand(t[0] * s, t[1] * s), hand(t[2] * s, t[3] * s)], None);
                }
                let [m1, m2] = st.cumulative_motion();
                (st.resolve_dominance(), (m1 - m2).abs())
            };
            let (d1, gap) = run(1.0);
            let (d2, _) = run(scale);
            // exact ties can flip under rounding; only compare clear winners
            if gap > 1e-9 {
                prop_assert_eq!(d1, d2);
            }
        }
    }
}
