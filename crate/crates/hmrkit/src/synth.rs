//! Synthetic metric scenes with exact ground truth: bodies at known world
//! positions, projected keypoints and detection boxes under chosen
//! intrinsics, camera extrinsics paths, and the camera-to-world trajectory
//! lift.
//!
//! World frame: `y` up (gravity along `-y`), bodies walk on the `y = 0`
//! ground plane facing the path tangent. Cameras follow the computer-vision
//! convention (`x` right, `y` down, `z` forward) and are placed far enough
//! back that every joint projects inside the image.

use crate::body::{BodyParams, SkeletonTemplate};
use crate::camera::{project, BBox, CameraError, ImageSize, Intrinsics};
use crate::metrics::JointSeq;
use nalgebra::{Matrix3, Rotation3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// Version tag of the scene-sample JSON-lines schema.
pub const SYNTH_SCHEMA: &str = "synth-1";

/// Crop output resolution implied by generated detection boxes
/// (`bbox.scale = bbox.side / CROP_RESOLUTION`).
pub const CROP_RESOLUTION: f64 = 224.0;

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("joint {joint} is behind the camera (z = {z})")]
    BehindCamera { joint: usize, z: f64 },
    #[error("invalid extrinsics: {0}")]
    InvalidExtrinsics(String),
    #[error("invalid trajectory spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Camera(#[from] CameraError),
}

/// World-to-camera rigid transform: `x_cam = R x_world + t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Extrinsics {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl Extrinsics {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let r = self.rotation;
        let err = (r * r.transpose() - Matrix3::identity()).norm();
        if err > 1e-10 {
            return Err(SynthError::InvalidExtrinsics(format!(
                "rotation is not orthonormal (|RR^T - I| = {err})"
            )));
        }
        if (r.determinant() - 1.0).abs() > 1e-10 {
            return Err(SynthError::InvalidExtrinsics(format!(
                "rotation determinant {} is not +1",
                r.determinant()
            )));
        }
        if !self.translation.iter().all(|v| v.is_finite()) {
            return Err(SynthError::InvalidExtrinsics(
                "translation is not finite".into(),
            ));
        }
        Ok(())
    }

    /// Camera placed at `eye` looking at `target`, image-down aligned with
    /// world gravity (no roll).
    pub fn look_at(eye: Vector3<f64>, target: Vector3<f64>) -> Self {
        let forward = (target - eye).normalize();
        let x_cam = (-Vector3::y()).cross(&forward).normalize();
        let y_cam = forward.cross(&x_cam);
        let rotation = Matrix3::from_rows(&[
            x_cam.transpose(),
            y_cam.transpose(),
            forward.transpose(),
        ]);
        Self {
            translation: -(rotation * eye),
            rotation,
        }
    }

    pub fn world_to_camera(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    pub fn to_file(&self) -> ExtrinsicsFile {
        let r = self.rotation;
        ExtrinsicsFile {
            rotation: [
                [r[(0, 0)], r[(0, 1)], r[(0, 2)]],
                [r[(1, 0)], r[(1, 1)], r[(1, 2)]],
                [r[(2, 0)], r[(2, 1)], r[(2, 2)]],
            ],
            translation: [self.translation.x, self.translation.y, self.translation.z],
        }
    }

    pub fn from_file(f: &ExtrinsicsFile) -> Result<Self, SynthError> {
        let e = Self {
            rotation: Matrix3::from_rows(&[
                Vector3::from_column_slice(&f.rotation[0]).transpose(),
                Vector3::from_column_slice(&f.rotation[1]).transpose(),
                Vector3::from_column_slice(&f.rotation[2]).transpose(),
            ]),
            translation: Vector3::from_column_slice(&f.translation),
        };
        e.validate()?;
        Ok(e)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtrinsicsFile {
    pub rotation: [[f64; 3]; 3],
    pub translation: [f64; 3],
}

/// Lift camera-frame points to the world frame: `x_w = R^T (x_c - t)`.
pub fn camera_to_world(points_cam: &[Vector3<f64>], extr: &Extrinsics) -> Vec<Vector3<f64>> {
    let rt = extr.rotation.transpose();
    points_cam.iter().map(|p| rt * (p - extr.translation)).collect()
}

/// One rendered frame: body parameters in the camera frame, noisy 2D
/// keypoints with confidences, detection box, camera, and the exact world
/// joints.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSample {
    pub params: BodyParams,
    /// Per joint `[u, v, confidence]`.
    pub kp2d: Vec<[f64; 3]>,
    pub bbox: BBox,
    pub intrinsics: Intrinsics,
    pub image: ImageSize,
    pub extrinsics: Extrinsics,
    pub world_joints: Vec<Vector3<f64>>,
}

/// JSON-lines schema of a scene sample.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneSampleFile {
    pub schema: String,
    pub params: BodyParams,
    pub kp2d: Vec<[f64; 3]>,
    pub bbox: BBox,
    pub camera: crate::camera::CameraFile,
    pub extrinsics: ExtrinsicsFile,
    pub world_joints: Vec<[f64; 3]>,
}

impl SceneSample {
    pub fn to_file(&self) -> SceneSampleFile {
        SceneSampleFile {
            schema: SYNTH_SCHEMA.to_string(),
            params: self.params.clone(),
            kp2d: self.kp2d.clone(),
            bbox: self.bbox,
            camera: crate::camera::CameraFile {
                fx: self.intrinsics.fx,
                fy: self.intrinsics.fy,
                cx: self.intrinsics.cx,
                cy: self.intrinsics.cy,
                width: self.image.width,
                height: self.image.height,
            },
            extrinsics: self.extrinsics.to_file(),
            world_joints: self.world_joints.iter().map(|p| [p.x, p.y, p.z]).collect(),
        }
    }

    pub fn from_file(f: SceneSampleFile) -> Result<Self, SynthError> {
        if f.schema != SYNTH_SCHEMA {
            return Err(SynthError::InvalidSpec(format!(
                "unsupported sample schema {:?}",
                f.schema
            )));
        }
        Ok(Self {
            params: f.params,
            kp2d: f.kp2d,
            bbox: f.bbox,
            intrinsics: f.camera.intrinsics()?,
            image: f.camera.size()?,
            extrinsics: Extrinsics::from_file(&f.extrinsics)?,
            world_joints: f
                .world_joints
                .iter()
                .map(|p| Vector3::new(p[0], p[1], p[2]))
                .collect(),
        })
    }
}

/// Squarified tight box around the points with a 10% margin, center
/// preserved.
fn squarify(points: &[[f64; 2]]) -> BBox {
    let mut u_min = f64::INFINITY;
    let mut u_max = f64::NEG_INFINITY;
    let mut v_min = f64::INFINITY;
    let mut v_max = f64::NEG_INFINITY;
    for p in points {
        u_min = u_min.min(p[0]);
        u_max = u_max.max(p[0]);
        v_min = v_min.min(p[1]);
        v_max = v_max.max(p[1]);
    }
    let side = ((u_max - u_min).max(v_max - v_min) * 1.1).max(1.0);
    let cu = (u_min + u_max) / 2.0;
    let cv = (v_min + v_max) / 2.0;
    BBox {
        u0: cu - side / 2.0,
        v0: cv - side / 2.0,
        side,
        scale: side / CROP_RESOLUTION,
    }
}

/// Render one frame. Keypoints are the exact projections plus isotropic
/// Gaussian pixel noise of deviation `sigma_kp` (seeded, deterministic);
/// joints whose true projection falls outside the image get confidence 0.
/// The bbox is built from the noiseless projections.
pub fn render_sample(
    tpl: &SkeletonTemplate,
    params: &BodyParams,
    intrinsics: &Intrinsics,
    image: ImageSize,
    extr: &Extrinsics,
    sigma_kp: f64,
    seed: u64,
) -> Result<SceneSample, SynthError> {
    let state = tpl.forward(params);
    let mut clean = Vec::with_capacity(state.joints.len());
    for (j, joint) in state.joints.iter().enumerate() {
        if joint.z <= 0.0 {
            return Err(SynthError::BehindCamera { joint: j, z: joint.z });
        }
        let px = project(joint, intrinsics).expect("depth checked above");
        clean.push([px.u, px.v]);
    }
    let bbox = squarify(&clean);

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma_kp.max(0.0)).map_err(|e| {
        SynthError::InvalidSpec(format!("bad keypoint noise deviation: {e}"))
    })?;
    let (w, h) = (image.width as f64, image.height as f64);
    let kp2d = clean
        .iter()
        .map(|p| {
            let inside = p[0] >= 0.0 && p[0] < w && p[1] >= 0.0 && p[1] < h;
            let (du, dv) = if sigma_kp > 0.0 {
                (noise.sample(&mut rng), noise.sample(&mut rng))
            } else {
                (0.0, 0.0)
            };
            [p[0] + du, p[1] + dv, if inside { 1.0 } else { 0.0 }]
        })
        .collect();

    Ok(SceneSample {
        params: params.clone(),
        kp2d,
        bbox,
        intrinsics: *intrinsics,
        image,
        extrinsics: extr.clone(),
        world_joints: camera_to_world(&state.joints, extr),
    })
}

/// Rate at which the regressed skeleton scales per unit of `beta[0]`,
/// measured from the head-to-foot joint distance. Equals the height-gain
/// rate for a pure-scale direction; slightly larger for the capsule
/// template, whose cap radii do not scale with the skeleton.
pub fn joint_scale_rate(tpl: &SkeletonTemplate) -> f64 {
    use crate::body::joint;
    let mut e0 = [0.0; crate::body::NUM_SHAPE_PARAMS];
    e0[0] = 1.0;
    let (_, j0) = tpl.shape_blend(&[0.0; crate::body::NUM_SHAPE_PARAMS]);
    let (_, j1) = tpl.shape_blend(&e0);
    let d0 = (j0[joint::HEAD] - j0[joint::LEFT_FOOT]).norm();
    let d1 = (j1[joint::HEAD] - j1[joint::LEFT_FOOT]).norm();
    d1 / d0 - 1.0
}

/// Body-scale / depth ambiguity pair: sample B scales the skeleton by
/// `alpha` through the height shape direction and the camera-frame
/// translation by `alpha`. Under the default template the keypoints
/// coincide approximately (the capsule-model scale field is not an exact
/// uniform scaling at the joints); under the pure-scale height direction
/// they coincide exactly.
pub fn ambiguity_pair(
    tpl: &SkeletonTemplate,
    base: &BodyParams,
    intrinsics: &Intrinsics,
    image: ImageSize,
    alpha: f64,
) -> Result<(SceneSample, SceneSample), SynthError> {
    if !(alpha > 0.0) {
        return Err(SynthError::InvalidSpec(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let extr = Extrinsics::identity();
    let a = render_sample(tpl, base, intrinsics, image, &extr, 0.0, 0)?;
    let mut scaled = base.clone();
    let g = joint_scale_rate(tpl);
    scaled.beta[0] = (alpha * (1.0 + g * base.beta[0]) - 1.0) / g;
    for t in scaled.theta_t.iter_mut() {
        *t *= alpha;
    }
    let b = render_sample(tpl, &scaled, intrinsics, image, &extr, 0.0, 0)?;
    Ok((a, b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    Line,
    Circle,
    FigureEight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CameraMode {
    Static,
    Orbiting,
}

/// Trajectory generation request: a ground path walked at constant speed
/// with the heading tangent to the path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySpec {
    pub path: PathKind,
    /// Total path length in meters.
    pub length: f64,
    pub frames: usize,
    pub fps: f64,
    pub camera: CameraMode,
    /// Keypoint noise deviation in pixels.
    pub noise_sigma_kp: f64,
    pub seed: u64,
}

impl TrajectorySpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.frames < 2 {
            return Err(SynthError::InvalidSpec(format!(
                "need at least 2 frames, got {}",
                self.frames
            )));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(SynthError::InvalidSpec(format!(
                "path length {} must be positive",
                self.length
            )));
        }
        if !(self.fps > 0.0) {
            return Err(SynthError::InvalidSpec(format!(
                "fps {} must be positive",
                self.fps
            )));
        }
        if self.noise_sigma_kp < 0.0 {
            return Err(SynthError::InvalidSpec(format!(
                "keypoint noise {} must be non-negative",
                self.noise_sigma_kp
            )));
        }
        Ok(())
    }
}

/// Ground-plane path point and unit tangent at arc length `s` in `[0, L]`.
/// Paths start at the origin.
fn path_point(kind: PathKind, length: f64, s: f64) -> (Vector3<f64>, Vector3<f64>) {
    match kind {
        PathKind::Line => (Vector3::new(s, 0.0, 0.0), Vector3::x()),
        PathKind::Circle => {
            let r = length / std::f64::consts::TAU;
            let a = s / r;
            (
                Vector3::new(r * a.sin(), 0.0, r * (1.0 - a.cos())),
                Vector3::new(a.cos(), 0.0, a.sin()),
            )
        }
        PathKind::FigureEight => {
            // Gerono lemniscate, numerically reparameterized to arc length.
            let (pts, total) = lemniscate_table();
            let target = s / length * total;
            let mut lo = 0usize;
            let mut hi = pts.len() - 1;
            while hi - lo > 1 {
                let mid = (lo + hi) / 2;
                if pts[mid].0 <= target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let (s0, p0) = pts[lo];
            let (s1, p1) = pts[hi];
            let t = if s1 > s0 { (target - s0) / (s1 - s0) } else { 0.0 };
            let p = p0 + (p1 - p0) * t;
            let tangent = (p1 - p0).normalize();
            (p * (length / total), tangent)
        }
    }
}

/// Dense arc-length table of a unit Gerono lemniscate, anchored at its
/// crossing point.
fn lemniscate_table() -> (Vec<(f64, Vector3<f64>)>, f64) {
    const N: usize = 4096;
    let mut pts = Vec::with_capacity(N + 1);
    let mut acc = 0.0;
    let mut prev: Option<Vector3<f64>> = None;
    for i in 0..=N {
        let u = i as f64 / N as f64 * std::f64::consts::TAU;
        let p = Vector3::new(u.sin(), 0.0, (2.0 * u).sin() / 2.0);
        if let Some(q) = prev {
            acc += (p - q).norm();
        }
        pts.push((acc, p));
        prev = Some(p);
    }
    (pts, acc)
}

/// Generated trajectory: exact world-frame joints and the per-frame scene
/// samples observed by the camera.
pub fn make_trajectory(
    spec: &TrajectorySpec,
    tpl: &SkeletonTemplate,
) -> Result<(JointSeq, Vec<SceneSample>), SynthError> {
    spec.validate()?;
    let params0 = BodyParams::zeros();
    let rest = tpl.forward(&params0);
    // Root height over the ground so the lowest vertex touches y = 0.
    let root_h = -rest
        .vertices
        .iter()
        .map(|v| v.y)
        .fold(f64::INFINITY, f64::min);

    // Sample the path over [0, length] inclusive.
    let roots_tangents: Vec<(Vector3<f64>, Vector3<f64>)> = (0..spec.frames)
        .map(|i| {
            let s = spec.length * i as f64 / (spec.frames - 1) as f64;
            let (p, t) = path_point(spec.path, spec.length, s);
            (p + Vector3::y() * root_h, t)
        })
        .collect();

    // Camera placement: far enough back that the full path plus a standing
    // body stays inside the image under the chosen intrinsics.
    let f = crate::camera::focal_from_convention(
        crate::camera::FocalConvention::DiagFull,
        ImageSize {
            width: 1920,
            height: 1080,
        },
    );
    let image = ImageSize {
        width: 1920,
        height: 1080,
    };
    let intrinsics = Intrinsics::new(f, f, 960.0, 540.0).unwrap();
    let centroid = roots_tangents
        .iter()
        .map(|(p, _)| p)
        .sum::<Vector3<f64>>()
        / spec.frames as f64;
    let spread = roots_tangents
        .iter()
        .map(|(p, _)| (p - centroid).norm())
        .fold(0.0, f64::max);
    // Horizontal containment: f * (spread + arm span) / d < 0.42 * width.
    let dist = (f * (spread + 1.2) / (0.42 * image.width as f64)).max(spread + 6.0);

    let mut gt_frames = Vec::with_capacity(spec.frames);
    let mut samples = Vec::with_capacity(spec.frames);
    for (i, (root, tangent)) in roots_tangents.iter().enumerate() {
        let extr = match spec.camera {
            CameraMode::Static => Extrinsics::look_at(
                centroid + Vector3::new(0.0, 1.6 - centroid.y, -dist),
                centroid,
            ),
            CameraMode::Orbiting => {
                // Quarter orbit over the sequence at constant height.
                let a = 0.25 * std::f64::consts::TAU * i as f64 / spec.frames as f64
                    - std::f64::consts::FRAC_PI_2;
                let eye = centroid
                    + Vector3::new(dist * a.cos(), 1.6 - centroid.y, dist * a.sin());
                Extrinsics::look_at(eye, centroid)
            }
        };

        // Heading: body forward (+z at rest) turned onto the path tangent.
        let yaw = tangent.x.atan2(tangent.z);
        let r_wb = Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(Vector3::y()), yaw);
        let r_cb = Rotation3::from_matrix_unchecked(extr.rotation) * r_wb;
        let aa = r_cb.scaled_axis();
        let root_cam = extr.world_to_camera(root);
        let mut params = BodyParams::zeros();
        params.theta_r = [aa.x, aa.y, aa.z];
        params.theta_t = [root_cam.x, root_cam.y, root_cam.z];

        let frame_seed = spec
            .seed
            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(i as u64);
        let sample = render_sample(
            tpl,
            &params,
            &intrinsics,
            image,
            &extr,
            spec.noise_sigma_kp,
            frame_seed,
        )?;
        gt_frames.push(sample.world_joints.clone());
        samples.push(sample);
    }
    let gt = JointSeq::new(gt_frames, spec.fps)
        .map_err(|e| SynthError::InvalidSpec(e.to_string()))?;
    Ok((gt, samples))
}
