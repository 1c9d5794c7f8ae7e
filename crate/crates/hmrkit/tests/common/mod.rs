//! Shared helpers for the integration suites.

use hmrkit::metrics::JointSeq;
use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Drift amplitude of the committed two-segment fixture, meters.
pub const DRIFT_DELTA: f64 = 0.010;

/// Hand-derived expected values for the drift fixture, mm. Segment 1 is
/// exact; segment 2 carries per-frame offsets following the pattern
/// `[3, -5, 1, 1] * delta` on x. The pattern has zero sum and zero first
/// moment, so the optimal whole-segment rigid alignment is the identity
/// and the aligned-segment error is `mean |q| = 2.5 delta` per frame,
/// while the first-frame alignment removes the frame-100 offset
/// `3 delta`, leaving `mean |q - 3| = 3 delta`. Averaged over the two
/// 100-frame segments: 1.25 delta and 1.5 delta.
pub const DRIFT_WA_MM: f64 = 12.5;
pub const DRIFT_W_MM: f64 = 15.0;

/// Rebuild the committed drift fixture: 200 frames, 4 joints, an
/// asymmetric rigid cluster walking along z, with the q-pattern offsets in
/// the second 100-frame segment.
pub fn drift_fixture() -> (JointSeq, JointSeq) {
    let mut rng = ChaCha12Rng::seed_from_u64(77);
    let cloud: Vec<Vector3<f64>> = (0..4)
        .map(|_| {
            Vector3::new(
                rng.gen_range(-0.6..0.6),
                rng.gen_range(-0.6..0.6),
                rng.gen_range(-0.6..0.6),
            )
        })
        .collect();
    let gt_frames: Vec<Vec<Vector3<f64>>> = (0..200)
        .map(|i| {
            cloud
                .iter()
                .map(|p| p + Vector3::new(0.0, 0.9, 0.015 * i as f64))
                .collect()
        })
        .collect();
    let pattern = [3.0, -5.0, 1.0, 1.0];
    let mut pred_frames = gt_frames.clone();
    for i in 100..200 {
        let off = Vector3::new(pattern[(i - 100) % 4] * DRIFT_DELTA, 0.0, 0.0);
        for p in pred_frames[i].iter_mut() {
            *p += off;
        }
    }
    (
        JointSeq::new(pred_frames, 30.0).unwrap(),
        JointSeq::new(gt_frames, 30.0).unwrap(),
    )
}
