//! Evaluation metrics for body and trajectory estimates: local metrics
//! (MPJPE, PA-MPJPE, PVE), world-frame metrics over 100-frame segments
//! (WA-MPJPE100, W-MPJPE100), root translation error as a percentage of
//! path length (RTE), and egocentric root velocity error (ERVE).
//!
//! Conventions, matching the standard evaluation protocol:
//! - MPJPE and PVE are root-aligned first: joint sets subtract joint 0
//!   (the pelvis), vertex sets subtract vertex 0 (a pelvis-ring vertex in
//!   the procedural template).
//! - PA-MPJPE aligns with a full similarity transform (scale included);
//!   the world metrics align rigidly (scale excluded, they are metric).
//! - Sequences shorter than one segment fall back to a single
//!   whole-sequence segment; trailing segments with at least 2 frames are
//!   kept and weighted by frame count.
//! - RTE aligns with a first-frame-anchored yaw (rotation about the
//!   gravity axis `y`) plus translation.
//! - ERVE uses forward differences.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

/// Frames per world-metric segment.
pub const SEGMENT_LEN: usize = 100;

const MM_PER_M: f64 = 1000.0;

#[derive(Debug, thiserror::Error)]
pub enum MetricError {
    #[error("degenerate point configuration: {0}")]
    DegenerateConfiguration(String),
    #[error("sequence length mismatch: {pred} vs {gt}")]
    LengthMismatch { pred: usize, gt: usize },
    #[error("ground-truth path length {length_m} m is below 1 mm")]
    ZeroPathLength { length_m: f64 },
    #[error("sequence too short: {got} frames, need at least {min}")]
    TooShort { got: usize, min: usize },
    #[error("malformed sequence: {0}")]
    MalformedSequence(String),
}

/// Similarity transform `x -> scale * R * x + t` with `det(R) = +1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityTransform {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
    pub scale: f64,
}

impl SimilarityTransform {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
            scale: 1.0,
        }
    }

    pub fn apply(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p * self.scale + self.translation
    }
}

/// Least-squares similarity (or rigid when `with_scale` is false) transform
/// mapping `src` onto `dst`, reflections excluded.
pub fn umeyama(
    src: &[Vector3<f64>],
    dst: &[Vector3<f64>],
    with_scale: bool,
) -> Result<SimilarityTransform, MetricError> {
    if src.len() != dst.len() {
        return Err(MetricError::LengthMismatch {
            pred: src.len(),
            gt: dst.len(),
        });
    }
    let n = src.len();
    if n < 3 {
        return Err(MetricError::DegenerateConfiguration(format!(
            "need at least 3 points, got {n}"
        )));
    }
    let inv_n = 1.0 / n as f64;
    let mu_src: Vector3<f64> = src.iter().sum::<Vector3<f64>>() * inv_n;
    let mu_dst: Vector3<f64> = dst.iter().sum::<Vector3<f64>>() * inv_n;

    let mut cov = Matrix3::zeros();
    let mut var_src = 0.0;
    for (s, d) in src.iter().zip(dst) {
        let sc = s - mu_src;
        let dc = d - mu_dst;
        cov += dc * sc.transpose();
        var_src += sc.norm_squared();
    }
    cov *= inv_n;
    var_src *= inv_n;
    if var_src <= f64::EPSILON {
        return Err(MetricError::DegenerateConfiguration(
            "source points are coincident".into(),
        ));
    }

    let svd = cov.svd(true, true);
    let u = svd.u.expect("svd with u");
    let vt = svd.v_t.expect("svd with v_t");
    let sing = svd.singular_values;
    // Collinear sources leave the rotation about their axis unconstrained.
    if sing[1] <= 1e-12 * sing[0].max(f64::EPSILON) {
        return Err(MetricError::DegenerateConfiguration(
            "source points are collinear".into(),
        ));
    }
    let mut s_diag = Vector3::new(1.0, 1.0, 1.0);
    if (u.determinant() * vt.determinant()) < 0.0 {
        s_diag[2] = -1.0;
    }
    let rotation = u * Matrix3::from_diagonal(&s_diag) * vt;
    let scale = if with_scale {
        (sing[0] * s_diag[0] + sing[1] * s_diag[1] + sing[2] * s_diag[2]) / var_src
    } else {
        1.0
    };
    let translation = mu_dst - rotation * mu_src * scale;
    Ok(SimilarityTransform {
        rotation,
        translation,
        scale,
    })
}

fn mean_aligned_distance(
    pred: &[Vector3<f64>],
    gt: &[Vector3<f64>],
    transform: &SimilarityTransform,
) -> f64 {
    let sum: f64 = pred
        .iter()
        .zip(gt)
        .map(|(p, g)| (transform.apply(p) - g).norm())
        .sum();
    sum / pred.len() as f64
}

/// Mean per-joint position error in mm, after root alignment (joint 0).
pub fn mpjpe(pred: &[Vector3<f64>], gt: &[Vector3<f64>]) -> f64 {
    assert_eq!(pred.len(), gt.len(), "joint count mismatch");
    assert!(!pred.is_empty());
    let pr = pred[0];
    let gr = gt[0];
    let sum: f64 = pred
        .iter()
        .zip(gt)
        .map(|(p, g)| ((p - pr) - (g - gr)).norm())
        .sum();
    sum / pred.len() as f64 * MM_PER_M
}

/// Procrustes-aligned MPJPE in mm: the prediction is mapped onto the
/// ground truth by the optimal similarity transform first.
pub fn pa_mpjpe(pred: &[Vector3<f64>], gt: &[Vector3<f64>]) -> Result<f64, MetricError> {
    let t = umeyama(pred, gt, true)?;
    Ok(mean_aligned_distance(pred, gt, &t) * MM_PER_M)
}

/// Mean per-vertex error in mm, after root alignment (vertex 0).
pub fn pve(pred_verts: &[Vector3<f64>], gt_verts: &[Vector3<f64>]) -> f64 {
    assert_eq!(pred_verts.len(), gt_verts.len(), "vertex count mismatch");
    assert!(!pred_verts.is_empty());
    let pr = pred_verts[0];
    let gr = gt_verts[0];
    let sum: f64 = pred_verts
        .iter()
        .zip(gt_verts)
        .map(|(p, g)| ((p - pr) - (g - gr)).norm())
        .sum();
    sum / pred_verts.len() as f64 * MM_PER_M
}

/// A sequence of per-frame joint sets in a fixed frame, with a validity
/// mask. `J` is constant across frames.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSeq {
    pub frames: Vec<Vec<Vector3<f64>>>,
    pub frame_rate: f64,
    pub valid: Vec<bool>,
}

impl JointSeq {
    pub fn new(frames: Vec<Vec<Vector3<f64>>>, frame_rate: f64) -> Result<Self, MetricError> {
        let valid = vec![true; frames.len()];
        Self::with_mask(frames, frame_rate, valid)
    }

    pub fn with_mask(
        frames: Vec<Vec<Vector3<f64>>>,
        frame_rate: f64,
        valid: Vec<bool>,
    ) -> Result<Self, MetricError> {
        if frames.is_empty() {
            return Err(MetricError::TooShort { got: 0, min: 1 });
        }
        let j = frames[0].len();
        if j == 0 {
            return Err(MetricError::MalformedSequence("empty joint set".into()));
        }
        if frames.iter().any(|f| f.len() != j) {
            return Err(MetricError::MalformedSequence(
                "joint count varies across frames".into(),
            ));
        }
        if valid.len() != frames.len() {
            return Err(MetricError::MalformedSequence(
                "validity mask length does not match frame count".into(),
            ));
        }
        Ok(Self {
            frames,
            frame_rate,
            valid,
        })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn num_joints(&self) -> usize {
        self.frames[0].len()
    }

    /// Root (joint 0) positions per frame.
    pub fn roots(&self) -> Vec<Vector3<f64>> {
        self.frames.iter().map(|f| f[0]).collect()
    }

    pub fn to_file(&self) -> JointSeqFile {
        JointSeqFile {
            fps: self.frame_rate,
            joints: self
                .frames
                .iter()
                .map(|f| f.iter().map(|p| [p.x, p.y, p.z]).collect())
                .collect(),
            valid: if self.valid.iter().all(|&v| v) {
                None
            } else {
                Some(self.valid.clone())
            },
        }
    }

    pub fn from_file(file: JointSeqFile) -> Result<Self, MetricError> {
        let frames: Vec<Vec<Vector3<f64>>> = file
            .joints
            .iter()
            .map(|f| f.iter().map(|p| Vector3::new(p[0], p[1], p[2])).collect())
            .collect();
        let valid = file.valid.unwrap_or_else(|| vec![true; frames.len()]);
        Self::with_mask(frames, file.fps, valid)
    }

    /// Root-only CSV (`frame,x,y,z` with a header line).
    pub fn write_root_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "frame,x,y,z")?;
        for (i, f) in self.frames.iter().enumerate() {
            let r = f[0];
            writeln!(w, "{},{},{},{}", i, r.x, r.y, r.z)?;
        }
        Ok(())
    }

    /// Parse the root-only CSV variant into a single-joint sequence.
    pub fn read_root_csv(text: &str, fps: f64) -> Result<Self, MetricError> {
        let mut frames = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (ln == 0 && line.starts_with("frame")) {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 4 {
                return Err(MetricError::MalformedSequence(format!(
                    "line {}: expected 4 columns, got {}",
                    ln + 1,
                    cols.len()
                )));
            }
            let mut v = [0.0; 3];
            for (i, c) in cols[1..].iter().enumerate() {
                v[i] = c.parse::<f64>().map_err(|e| {
                    MetricError::MalformedSequence(format!("line {}: {e}", ln + 1))
                })?;
            }
            frames.push(vec![Vector3::new(v[0], v[1], v[2])]);
        }
        Self::new(frames, fps)
    }
}

/// JSON schema of a joint sequence.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JointSeqFile {
    pub fps: f64,
    pub joints: Vec<Vec<[f64; 3]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub valid: Option<Vec<bool>>,
}

/// Consecutive segment ranges of up to [`SEGMENT_LEN`] frames. A trailing
/// segment of at least 2 frames is kept; a sequence that yields nothing
/// (a single frame) falls back to one whole-sequence segment.
fn segment_ranges(t: usize) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < t {
        let end = (start + SEGMENT_LEN).min(t);
        if end - start >= 2 || end - start == t {
            out.push(start..end);
        }
        start = end;
    }
    out
}

fn check_pair(pred: &JointSeq, gt: &JointSeq) -> Result<(), MetricError> {
    if pred.len() != gt.len() {
        return Err(MetricError::LengthMismatch {
            pred: pred.len(),
            gt: gt.len(),
        });
    }
    if pred.num_joints() != gt.num_joints() {
        return Err(MetricError::LengthMismatch {
            pred: pred.num_joints(),
            gt: gt.num_joints(),
        });
    }
    Ok(())
}

fn segment_world_error(
    pred: &JointSeq,
    gt: &JointSeq,
    first_frame_only: bool,
) -> Result<f64, MetricError> {
    check_pair(pred, gt)?;
    // Per-segment means in mm, weighted by usable frame count. A single
    // segment returns its value directly so that recomposing per-segment
    // calls reproduces the whole-sequence result bit for bit.
    let mut segments: Vec<(f64, usize)> = Vec::new();
    for range in segment_ranges(pred.len()) {
        let usable: Vec<usize> = range
            .clone()
            .filter(|&i| pred.valid[i] && gt.valid[i])
            .collect();
        if usable.is_empty() {
            continue;
        }
        let gather = |seq: &JointSeq, idx: &[usize]| -> Vec<Vector3<f64>> {
            idx.iter()
                .flat_map(|&i| seq.frames[i].iter().copied())
                .collect()
        };
        let (p_align, g_align) = if first_frame_only {
            let first = [usable[0]];
            (gather(pred, &first), gather(gt, &first))
        } else {
            (gather(pred, &usable), gather(gt, &usable))
        };
        // Fewer than 3 alignment points (root-only first-frame case) leave
        // the rotation unobservable; fall back to translation only.
        let t = if p_align.len() < 3 {
            let n = p_align.len() as f64;
            let mu_p: Vector3<f64> = p_align.iter().sum::<Vector3<f64>>() / n;
            let mu_g: Vector3<f64> = g_align.iter().sum::<Vector3<f64>>() / n;
            SimilarityTransform {
                rotation: Matrix3::identity(),
                translation: mu_g - mu_p,
                scale: 1.0,
            }
        } else {
            umeyama(&p_align, &g_align, false)?
        };
        let p_all = gather(pred, &usable);
        let g_all = gather(gt, &usable);
        let mean = mean_aligned_distance(&p_all, &g_all, &t) * MM_PER_M;
        segments.push((mean, usable.len()));
    }
    match segments.as_slice() {
        [] => Err(MetricError::TooShort { got: 0, min: 1 }),
        [(mean, _)] => Ok(*mean),
        many => {
            let mut num = 0.0;
            let mut den = 0usize;
            for (mean, n) in many {
                num += mean * *n as f64;
                den += n;
            }
            Ok(num / den as f64)
        }
    }
}

/// World joint error in mm with per-segment rigid alignment estimated from
/// all joints of all frames of the segment.
pub fn wa_mpjpe_100(pred: &JointSeq, gt: &JointSeq) -> Result<f64, MetricError> {
    segment_world_error(pred, gt, false)
}

/// World joint error in mm with per-segment rigid alignment estimated from
/// the first frame only and applied to the whole segment.
pub fn w_mpjpe_100(pred: &JointSeq, gt: &JointSeq) -> Result<f64, MetricError> {
    segment_world_error(pred, gt, true)
}

/// Optimal yaw (rotation about `y`) mapping `src` onto `dst` in the
/// least-squares sense, both already anchored at the origin.
fn optimal_yaw(src: &[Vector3<f64>], dst: &[Vector3<f64>]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (s, d) in src.iter().zip(dst) {
        num += s.x * d.z - s.z * d.x;
        den += s.x * d.x + s.z * d.z;
    }
    if num == 0.0 && den == 0.0 {
        0.0
    } else {
        // R(theta) about y maps x -> x cos + z sin, z -> -x sin + z cos.
        (-num).atan2(den)
    }
}

fn yaw_rotation(theta: f64) -> Matrix3<f64> {
    let (s, c) = theta.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

/// Root translation error: percent of ground-truth path length after a
/// first-frame-anchored gravity-aligned rigid alignment.
pub fn rte(pred_root: &[Vector3<f64>], gt_root: &[Vector3<f64>]) -> Result<f64, MetricError> {
    if pred_root.len() != gt_root.len() {
        return Err(MetricError::LengthMismatch {
            pred: pred_root.len(),
            gt: gt_root.len(),
        });
    }
    if pred_root.len() < 2 {
        return Err(MetricError::TooShort {
            got: pred_root.len(),
            min: 2,
        });
    }
    let path: f64 = gt_root.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    if path < 1e-3 {
        return Err(MetricError::ZeroPathLength { length_m: path });
    }
    let p0 = pred_root[0];
    let g0 = gt_root[0];
    let src: Vec<Vector3<f64>> = pred_root.iter().map(|p| p - p0).collect();
    let dst: Vec<Vector3<f64>> = gt_root.iter().map(|g| g - g0).collect();
    let r = yaw_rotation(optimal_yaw(&src, &dst));
    let err_sum: f64 = src.iter().zip(&dst).map(|(s, d)| (r * s - d).norm()).sum();
    Ok(err_sum / src.len() as f64 / path * 100.0)
}

/// Egocentric root velocity error in mm per frame: mean norm of the
/// forward-difference velocity mismatch.
pub fn erve(pred_root: &[Vector3<f64>], gt_root: &[Vector3<f64>]) -> Result<f64, MetricError> {
    if pred_root.len() != gt_root.len() {
        return Err(MetricError::LengthMismatch {
            pred: pred_root.len(),
            gt: gt_root.len(),
        });
    }
    if pred_root.len() < 2 {
        return Err(MetricError::TooShort {
            got: pred_root.len(),
            min: 2,
        });
    }
    let sum: f64 = pred_root
        .windows(2)
        .zip(gt_root.windows(2))
        .map(|(p, g)| ((p[1] - p[0]) - (g[1] - g[0])).norm())
        .sum();
    Ok(sum / (pred_root.len() - 1) as f64 * MM_PER_M)
}

/// Per-frame mean of a local metric over the valid frames of a pair of
/// sequences.
pub fn seq_mpjpe(pred: &JointSeq, gt: &JointSeq) -> Result<f64, MetricError> {
    check_pair(pred, gt)?;
    let mut sum = 0.0;
    let mut n = 0usize;
    for i in 0..pred.len() {
        if pred.valid[i] && gt.valid[i] {
            sum += mpjpe(&pred.frames[i], &gt.frames[i]);
            n += 1;
        }
    }
    if n == 0 {
        return Err(MetricError::TooShort { got: 0, min: 1 });
    }
    Ok(sum / n as f64)
}

pub fn seq_pa_mpjpe(pred: &JointSeq, gt: &JointSeq) -> Result<f64, MetricError> {
    check_pair(pred, gt)?;
    let mut sum = 0.0;
    let mut n = 0usize;
    for i in 0..pred.len() {
        if pred.valid[i] && gt.valid[i] {
            sum += pa_mpjpe(&pred.frames[i], &gt.frames[i])?;
            n += 1;
        }
    }
    if n == 0 {
        return Err(MetricError::TooShort { got: 0, min: 1 });
    }
    Ok(sum / n as f64)
}

/// Computed metric suite. Fields are `None` when not requested or not
/// applicable to the inputs.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MetricReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mpjpe_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pa_mpjpe_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pve_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wa_mpjpe_100_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_mpjpe_100_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rte_percent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub erve_mm_per_frame: Option<f64>,
}

impl MetricReport {
    /// Aligned two-column text table; absent metrics print a dash.
    pub fn table(&self) -> String {
        let rows = [
            ("MPJPE [mm]", self.mpjpe_mm),
            ("PA-MPJPE [mm]", self.pa_mpjpe_mm),
            ("PVE [mm]", self.pve_mm),
            ("WA-MPJPE100 [mm]", self.wa_mpjpe_100_mm),
            ("W-MPJPE100 [mm]", self.w_mpjpe_100_mm),
            ("RTE [%]", self.rte_percent),
            ("ERVE [mm/frame]", self.erve_mm_per_frame),
        ];
        let mut out = String::new();
        for (name, value) in rows {
            let v = match value {
                Some(v) => format!("{v:.6}"),
                None => "-".to_string(),
            };
            out.push_str(&format!("{name:<18} {v:>14}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_cloud(rng: &mut StdRng, n: usize, spread: f64) -> Vec<Vector3<f64>> {
        (0..n)
            .map(|_| {
                Vector3::new(
                    rng.gen_range(-spread..spread),
                    rng.gen_range(-spread..spread),
                    rng.gen_range(-spread..spread),
                )
            })
            .collect()
    }

    fn random_rotation(rng: &mut StdRng) -> Matrix3<f64> {
        nalgebra::Rotation3::new(Vector3::new(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        ))
        .into_inner()
    }

    /// Independent absolute-orientation oracle: optimal rotation from the
    /// largest eigenvector of the quaternion profile matrix, scale and
    /// translation from the standard closed forms.
    fn horn_oracle(
        src: &[Vector3<f64>],
        dst: &[Vector3<f64>],
        with_scale: bool,
    ) -> SimilarityTransform {
        let n = src.len() as f64;
        let mu_s: Vector3<f64> = src.iter().sum::<Vector3<f64>>() / n;
        let mu_d: Vector3<f64> = dst.iter().sum::<Vector3<f64>>() / n;
        let mut m = Matrix3::zeros();
        for (s, d) in src.iter().zip(dst) {
            m += (s - mu_s) * (d - mu_d).transpose();
        }
        let (sxx, sxy, sxz) = (m[(0, 0)], m[(0, 1)], m[(0, 2)]);
        let (syx, syy, syz) = (m[(1, 0)], m[(1, 1)], m[(1, 2)]);
        let (szx, szy, szz) = (m[(2, 0)], m[(2, 1)], m[(2, 2)]);
        let q = nalgebra::Matrix4::new(
            sxx + syy + szz,
            syz - szy,
            szx - sxz,
            sxy - syx,
            syz - szy,
            sxx - syy - szz,
            sxy + syx,
            szx + sxz,
            szx - sxz,
            sxy + syx,
            -sxx + syy - szz,
            syz + szy,
            sxy - syx,
            szx + sxz,
            syz + szy,
            -sxx - syy + szz,
        );
        let eig = nalgebra::SymmetricEigen::new(q);
        let mut best = 0;
        for i in 1..4 {
            if eig.eigenvalues[i] > eig.eigenvalues[best] {
                best = i;
            }
        }
        let v = eig.eigenvectors.column(best);
        let quat = nalgebra::UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(
            v[0], v[1], v[2], v[3],
        ));
        let rotation = quat.to_rotation_matrix().into_inner();
        let scale = if with_scale {
            let mut num = 0.0;
            let mut den = 0.0;
            for (s, d) in src.iter().zip(dst) {
                num += (rotation * (s - mu_s)).dot(&(d - mu_d));
                den += (s - mu_s).norm_squared();
            }
            num / den
        } else {
            1.0
        };
        SimilarityTransform {
            rotation,
            translation: mu_d - rotation * mu_s * scale,
            scale,
        }
    }

    fn residual(src: &[Vector3<f64>], dst: &[Vector3<f64>], t: &SimilarityTransform) -> f64 {
        src.iter()
            .zip(dst)
            .map(|(s, d)| (t.apply(s) - d).norm_squared())
            .sum()
    }

    #[test]
    fn umeyama_identity() {
        let mut rng = StdRng::seed_from_u64(1);
        let pts = random_cloud(&mut rng, 24, 1.0);
        let t = umeyama(&pts, &pts, true).unwrap();
        assert_relative_eq!(t.scale, 1.0, epsilon = 1e-12);
        assert_relative_eq!(t.rotation, Matrix3::identity(), epsilon = 1e-10);
        assert!(t.translation.norm() < 1e-12);
    }

    #[test]
    fn umeyama_recovers_synthesized_transform() {
        let mut rng = StdRng::seed_from_u64(2);
        for _ in 0..50 {
            let src = random_cloud(&mut rng, 24, 1.0);
            let r = random_rotation(&mut rng);
            let t = Vector3::new(
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-5.0..5.0),
            );
            let dst: Vec<Vector3<f64>> = src.iter().map(|p| r * p * 2.0 + t).collect();
            let est = umeyama(&src, &dst, true).unwrap();
            assert_relative_eq!(est.scale, 2.0, max_relative = 1e-9);
            assert_relative_eq!(est.rotation, r, epsilon = 1e-9);
            assert_relative_eq!(est.translation, t, epsilon = 1e-9);
            assert!(est.rotation.determinant() > 0.0);
        }
    }

    #[test]
    fn umeyama_beats_random_transforms() {
        let mut rng = StdRng::seed_from_u64(3);
        let src = random_cloud(&mut rng, 24, 1.0);
        let dst = random_cloud(&mut rng, 24, 1.0);
        let est = umeyama(&src, &dst, true).unwrap();
        let best = residual(&src, &dst, &est);
        for _ in 0..1000 {
            let cand = SimilarityTransform {
                rotation: random_rotation(&mut rng),
                translation: Vector3::new(
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                ),
                scale: rng.gen_range(0.2..3.0),
            };
            assert!(residual(&src, &dst, &cand) >= best - 1e-9);
        }
    }

    #[test]
    fn umeyama_matches_independent_oracle() {
        let mut rng = StdRng::seed_from_u64(4);
        for _ in 0..100 {
            let src = random_cloud(&mut rng, 24, 1.0);
            // Correlated destination keeps the problem well-posed.
            let r = random_rotation(&mut rng);
            let dst: Vec<Vector3<f64>> = src
                .iter()
                .map(|p| {
                    r * p * 1.4
                        + Vector3::new(0.3, -0.2, 1.0)
                        + Vector3::new(
                            rng.gen_range(-0.05..0.05),
                            rng.gen_range(-0.05..0.05),
                            rng.gen_range(-0.05..0.05),
                        )
                })
                .collect();
            let a = umeyama(&src, &dst, true).unwrap();
            let b = horn_oracle(&src, &dst, true);
            assert_relative_eq!(a.rotation, b.rotation, epsilon = 1e-8);
            assert_relative_eq!(a.scale, b.scale, max_relative = 1e-8);
            assert_relative_eq!(a.translation, b.translation, epsilon = 1e-8);
        }
    }

    #[test]
    fn umeyama_rigid_has_unit_scale() {
        let mut rng = StdRng::seed_from_u64(5);
        let src = random_cloud(&mut rng, 24, 1.0);
        let dst: Vec<Vector3<f64>> = src.iter().map(|p| p * 3.0).collect();
        let t = umeyama(&src, &dst, false).unwrap();
        assert_eq!(t.scale, 1.0);
    }

    #[test]
    fn umeyama_degenerate_inputs() {
        let line: Vec<Vector3<f64>> = (0..10)
            .map(|i| Vector3::new(i as f64, 2.0 * i as f64, -i as f64))
            .collect();
        assert!(matches!(
            umeyama(&line, &line, true),
            Err(MetricError::DegenerateConfiguration(_))
        ));
        let two = vec![Vector3::zeros(), Vector3::x()];
        assert!(umeyama(&two, &two, true).is_err());
        let same = vec![Vector3::new(1.0, 1.0, 1.0); 5];
        assert!(umeyama(&same, &same, true).is_err());
    }

    #[test]
    fn mpjpe_examples() {
        let mut rng = StdRng::seed_from_u64(6);
        let gt = random_cloud(&mut rng, 24, 1.0);
        assert_eq!(mpjpe(&gt, &gt), 0.0);

        // One non-root joint offset by (3, 4, 0) mm: norm 5 mm over 24.
        let mut pred = gt.clone();
        pred[7] += Vector3::new(0.003, 0.004, 0.0);
        assert_relative_eq!(mpjpe(&pred, &gt), 5.0 / 24.0, max_relative = 1e-12);

        // Global translation is removed by root alignment.
        let shifted: Vec<Vector3<f64>> =
            pred.iter().map(|p| p + Vector3::new(4.0, -2.0, 9.0)).collect();
        assert_relative_eq!(mpjpe(&shifted, &gt), 5.0 / 24.0, max_relative = 1e-9);
    }

    #[test]
    fn pve_examples() {
        let mut rng = StdRng::seed_from_u64(7);
        let gt = random_cloud(&mut rng, 445, 1.0);
        assert_eq!(pve(&gt, &gt), 0.0);
        let shifted: Vec<Vector3<f64>> =
            gt.iter().map(|p| p + Vector3::new(0.01, 0.0, 0.0)).collect();
        assert_eq!(pve(&shifted, &gt), 0.0);
        let mut pred = gt.clone();
        pred[100] += Vector3::new(0.0, 0.01, 0.0);
        assert_relative_eq!(pve(&pred, &gt), 10.0 / 445.0, max_relative = 1e-12);
    }

    #[test]
    fn pa_mpjpe_removes_similarity_and_bounds_mpjpe() {
        let mut rng = StdRng::seed_from_u64(8);
        for _ in 0..100 {
            let gt = random_cloud(&mut rng, 24, 1.0);
            let r = random_rotation(&mut rng);
            let s: f64 = rng.gen_range(0.5..2.0);
            let t = Vector3::new(1.0, 2.0, 3.0);
            let pred: Vec<Vector3<f64>> = gt.iter().map(|p| r * p * s + t).collect();
            assert!(pa_mpjpe(&pred, &gt).unwrap() < 1e-9);
        }
        for _ in 0..500 {
            let gt = random_cloud(&mut rng, 24, 1.0);
            let pred = random_cloud(&mut rng, 24, 1.0);
            let pa = pa_mpjpe(&pred, &gt).unwrap();
            let mp = mpjpe(&pred, &gt);
            assert!(pa <= mp + 1e-9, "pa {pa} > mpjpe {mp}");
        }
    }

    #[test]
    fn pa_mpjpe_matches_oracle_alignment() {
        let mut rng = StdRng::seed_from_u64(9);
        for _ in 0..50 {
            let gt = random_cloud(&mut rng, 24, 1.0);
            let pred = random_cloud(&mut rng, 24, 1.0);
            let ours = pa_mpjpe(&pred, &gt).unwrap();
            let t = horn_oracle(&pred, &gt, true);
            let oracle = pred
                .iter()
                .zip(&gt)
                .map(|(p, g)| (t.apply(p) - g).norm())
                .sum::<f64>()
                / 24.0
                * 1000.0;
            assert_relative_eq!(ours, oracle, max_relative = 1e-8, epsilon = 1e-9);
        }
    }

    fn walking_seq(t: usize, j: usize) -> JointSeq {
        // Asymmetric rigid cluster translating along z.
        let mut rng = StdRng::seed_from_u64(10);
        let cloud = random_cloud(&mut rng, j, 0.6);
        let frames: Vec<Vec<Vector3<f64>>> = (0..t)
            .map(|i| {
                cloud
                    .iter()
                    .map(|p| p + Vector3::new(0.0, 0.9, 0.015 * i as f64))
                    .collect()
            })
            .collect();
        JointSeq::new(frames, 30.0).unwrap()
    }

    #[test]
    fn world_metrics_zero_for_per_segment_rigid_motion() {
        let gt = walking_seq(250, 24);
        let mut rng = StdRng::seed_from_u64(11);
        let mut pred_frames = gt.frames.clone();
        for range in super::segment_ranges(gt.len()) {
            let r = random_rotation(&mut rng);
            let t = Vector3::new(
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
            );
            for f in pred_frames[range].iter_mut() {
                for p in f.iter_mut() {
                    *p = r * *p + t;
                }
            }
        }
        let pred = JointSeq::new(pred_frames, 30.0).unwrap();
        assert!(wa_mpjpe_100(&pred, &gt).unwrap() < 1e-9);
        assert!(w_mpjpe_100(&pred, &gt).unwrap() < 1e-9);
    }

    #[test]
    fn w_dominates_wa_on_random_sequences() {
        let mut rng = StdRng::seed_from_u64(12);
        for _ in 0..100 {
            let t = rng.gen_range(5..180);
            let gt = walking_seq(t, 8);
            let pred_frames: Vec<Vec<Vector3<f64>>> = gt
                .frames
                .iter()
                .map(|f| {
                    f.iter()
                        .map(|p| {
                            p + Vector3::new(
                                rng.gen_range(-0.05..0.05),
                                rng.gen_range(-0.05..0.05),
                                rng.gen_range(-0.05..0.05),
                            )
                        })
                        .collect()
                })
                .collect();
            let pred = JointSeq::new(pred_frames, 30.0).unwrap();
            let wa = wa_mpjpe_100(&pred, &gt).unwrap();
            let w = w_mpjpe_100(&pred, &gt).unwrap();
            assert!(wa <= w + 1e-9, "wa {wa} > w {w}");
        }
    }

    /// Drift fixture: segment 1 exact, segment 2 with per-frame offsets
    /// following the zero-sum, zero-first-moment pattern [3,-5,1,1]*delta
    /// on x. The pattern leaves the optimal whole-segment alignment at the
    /// identity, so the expected errors are hand-computable:
    /// wa = mean|q| = 2.5 delta per segment-2 frame, w (aligned on frame 0,
    /// offset 3 delta) = mean|q - 3| = 3 delta, both averaged over the two
    /// equally long segments.
    pub(crate) fn drift_fixture(delta: f64) -> (JointSeq, JointSeq) {
        let gt = walking_seq(200, 4);
        let pattern = [3.0, -5.0, 1.0, 1.0];
        let mut pred_frames = gt.frames.clone();
        for i in 100..200 {
            let off = Vector3::new(pattern[(i - 100) % 4] * delta, 0.0, 0.0);
            for p in pred_frames[i].iter_mut() {
                *p += off;
            }
        }
        (JointSeq::new(pred_frames, 30.0).unwrap(), gt)
    }

    #[test]
    fn drift_fixture_matches_hand_derived_values() {
        let delta = 0.010; // 10 mm
        let (pred, gt) = drift_fixture(delta);
        let wa = wa_mpjpe_100(&pred, &gt).unwrap();
        let w = w_mpjpe_100(&pred, &gt).unwrap();
        // Per segment 2 frame: wa mean |q| = 2.5 delta, w mean |q - 3| = 3 delta.
        assert_relative_eq!(wa, 12.5, max_relative = 1e-6);
        assert_relative_eq!(w, 15.0, max_relative = 1e-6);
    }

    #[test]
    fn segment_policy_tails_and_fallback() {
        assert_eq!(super::segment_ranges(1), vec![0..1]);
        assert_eq!(super::segment_ranges(2), vec![0..2]);
        assert_eq!(super::segment_ranges(100), vec![0..100]);
        assert_eq!(super::segment_ranges(101), vec![0..100]); // 1-frame tail dropped
        assert_eq!(super::segment_ranges(102), vec![0..100, 100..102]);
        assert_eq!(super::segment_ranges(250), vec![0..100, 100..200, 200..250]);
    }

    #[test]
    fn segmenting_equals_concatenated_segment_calls() {
        let gt = walking_seq(300, 6);
        let mut rng = StdRng::seed_from_u64(13);
        let pred_frames: Vec<Vec<Vector3<f64>>> = gt
            .frames
            .iter()
            .map(|f| {
                f.iter()
                    .map(|p| {
                        p + Vector3::new(
                            rng.gen_range(-0.03..0.03),
                            rng.gen_range(-0.03..0.03),
                            rng.gen_range(-0.03..0.03),
                        )
                    })
                    .collect()
            })
            .collect();
        let pred = JointSeq::new(pred_frames, 30.0).unwrap();
        let whole_wa = wa_mpjpe_100(&pred, &gt).unwrap();
        let whole_w = w_mpjpe_100(&pred, &gt).unwrap();
        let mut parts_wa = 0.0;
        let mut parts_w = 0.0;
        for range in super::segment_ranges(300) {
            let sub = |s: &JointSeq| {
                JointSeq::new(s.frames[range.clone()].to_vec(), s.frame_rate).unwrap()
            };
            let n = range.len() as f64;
            parts_wa += wa_mpjpe_100(&sub(&pred), &sub(&gt)).unwrap() * n;
            parts_w += w_mpjpe_100(&sub(&pred), &sub(&gt)).unwrap() * n;
        }
        assert_eq!(whole_wa, parts_wa / 300.0);
        assert_eq!(whole_w, parts_w / 300.0);
    }

    #[test]
    fn rte_examples() {
        let t = 101;
        let gt: Vec<Vector3<f64>> = (0..t)
            .map(|i| Vector3::new(0.0, 0.9, 10.0 * i as f64 / (t - 1) as f64))
            .collect();
        assert_eq!(rte(&gt, &gt).unwrap(), 0.0);

        let offset: Vec<Vector3<f64>> =
            gt.iter().map(|p| p + Vector3::new(2.0, 0.1, -1.0)).collect();
        assert!(rte(&offset, &gt).unwrap() < 1e-9);

        // Linearly growing lateral drift with 10 cm terminal error: the
        // optimal yaw rotates the drifted straight line back onto the truth,
        // leaving the hypotenuse-vs-leg length difference.
        let drift: Vec<Vector3<f64>> = (0..t)
            .map(|i| {
                let s = i as f64 / (t - 1) as f64;
                Vector3::new(0.1 * s, 0.9, 10.0 * s)
            })
            .collect();
        let expect = 50.0 * ((10.0f64 * 10.0 + 0.1 * 0.1).sqrt() - 10.0) / 10.0;
        assert_relative_eq!(rte(&drift, &gt).unwrap(), expect, max_relative = 1e-9);
    }

    #[test]
    fn rte_rejects_zero_path() {
        let still = vec![Vector3::new(1.0, 1.0, 1.0); 10];
        assert!(matches!(
            rte(&still, &still),
            Err(MetricError::ZeroPathLength { .. })
        ));
    }

    #[test]
    fn erve_examples() {
        let gt: Vec<Vector3<f64>> = (0..50)
            .map(|i| Vector3::new(0.01 * i as f64, 0.9, 0.03 * i as f64))
            .collect();
        assert_eq!(erve(&gt, &gt).unwrap(), 0.0);
        let offset: Vec<Vector3<f64>> =
            gt.iter().map(|p| p + Vector3::new(5.0, -1.0, 2.0)).collect();
        assert!(erve(&offset, &gt).unwrap() < 1e-12);

        // Alternating +-1 mm z jitter: each velocity differs by 2 mm.
        let jitter: Vec<Vector3<f64>> = gt
            .iter()
            .enumerate()
            .map(|(i, p)| p + Vector3::new(0.0, 0.0, if i % 2 == 0 { 0.001 } else { -0.001 }))
            .collect();
        assert_relative_eq!(erve(&jitter, &gt).unwrap(), 2.0, max_relative = 1e-9);

        let short = vec![Vector3::zeros()];
        assert!(matches!(
            erve(&short, &short),
            Err(MetricError::TooShort { .. })
        ));
    }

    #[test]
    fn validity_mask_excludes_frames() {
        let gt = walking_seq(50, 6);
        let mut pred_frames = gt.frames.clone();
        // Corrupt one frame, then mask it out.
        for p in pred_frames[20].iter_mut() {
            *p += Vector3::new(10.0, 0.0, 0.0);
        }
        let mut valid = vec![true; 50];
        valid[20] = false;
        let pred = JointSeq::with_mask(pred_frames, 30.0, valid.clone()).unwrap();
        let gt_masked = JointSeq::with_mask(gt.frames.clone(), 30.0, valid).unwrap();
        assert!(wa_mpjpe_100(&pred, &gt_masked).unwrap() < 1e-9);
        assert!(seq_mpjpe(&pred, &gt_masked).unwrap() < 1e-9);
    }

    #[test]
    fn jointseq_json_and_csv_round_trip() {
        let seq = walking_seq(7, 3);
        let json = serde_json::to_string(&seq.to_file()).unwrap();
        let back = JointSeq::from_file(serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(seq, back);

        let mut csv = Vec::new();
        seq.write_root_csv(&mut csv).unwrap();
        let parsed = JointSeq::read_root_csv(std::str::from_utf8(&csv).unwrap(), 30.0).unwrap();
        assert_eq!(parsed.len(), seq.len());
        for (a, b) in parsed.roots().iter().zip(seq.roots()) {
            assert_eq!(*a, b);
        }
    }

    #[test]
    fn report_serializes_and_tabulates() {
        let r = MetricReport {
            mpjpe_mm: Some(12.5),
            pa_mpjpe_mm: Some(8.25),
            wa_mpjpe_100_mm: Some(30.0),
            ..Default::default()
        };
        let json = serde_json::to_string(&r).unwrap();
        assert!(!json.contains("pve_mm"));
        let table = r.table();
        assert!(table.contains("MPJPE"));
        assert!(table.contains('-'));
    }
}
