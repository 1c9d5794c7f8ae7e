//! Procedural parametric body with the standard 24-joint kinematic tree,
//! linear shape blending, linear blend skinning over a low-poly capsule
//! template, and a convex joint regressor.
//!
//! The template is deterministic (fixed seed), stands 1.700 m tall at
//! `beta = 0`, and uses `+y` as the up axis (gravity along `-y`). Shape
//! direction 0 approximates a uniform scaling of the body: the skeleton
//! scales about the pelvis while capsule radii stay fixed, so the height
//! gain per unit `beta[0]` is exactly [`HEIGHT_GAIN_PER_UNIT`]. Directions
//! 1..9 are smooth radial (girth) fields with zero vertical component, so
//! they leave the body height untouched.

use nalgebra::{Rotation3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const NUM_JOINTS: usize = 24;
pub const NUM_BODY_JOINTS: usize = 23;
pub const NUM_POSE_PARAMS: usize = 69;
pub const NUM_SHAPE_PARAMS: usize = 10;
pub const DEFAULT_NUM_VERTICES: usize = 445;
pub const MIN_NUM_VERTICES: usize = 72;

/// Rest height of the neutral body in meters.
pub const HEIGHT_M: f64 = 1.70;
/// Height increase in meters per unit of `beta[0]`.
pub const HEIGHT_GAIN_PER_UNIT: f64 = 0.07;

/// Version tag of the template JSON schema.
pub const TEMPLATE_SCHEMA: &str = "bmtpl-1";

const TEMPLATE_SEED: u64 = 0x626d_7470_6c31;
const RING_RADIUS: f64 = 0.02;
const RADIAL_DIR_AMPLITUDE: f64 = 0.015;

/// Joint indices of the kinematic tree.
pub mod joint {
    pub const PELVIS: usize = 0;
    pub const LEFT_HIP: usize = 1;
    pub const RIGHT_HIP: usize = 2;
    pub const SPINE1: usize = 3;
    pub const LEFT_KNEE: usize = 4;
    pub const RIGHT_KNEE: usize = 5;
    pub const SPINE2: usize = 6;
    pub const LEFT_ANKLE: usize = 7;
    pub const RIGHT_ANKLE: usize = 8;
    pub const SPINE3: usize = 9;
    pub const LEFT_FOOT: usize = 10;
    pub const RIGHT_FOOT: usize = 11;
    pub const NECK: usize = 12;
    pub const LEFT_COLLAR: usize = 13;
    pub const RIGHT_COLLAR: usize = 14;
    pub const HEAD: usize = 15;
    pub const LEFT_SHOULDER: usize = 16;
    pub const RIGHT_SHOULDER: usize = 17;
    pub const LEFT_ELBOW: usize = 18;
    pub const RIGHT_ELBOW: usize = 19;
    pub const LEFT_WRIST: usize = 20;
    pub const RIGHT_WRIST: usize = 21;
    pub const LEFT_HAND: usize = 22;
    pub const RIGHT_HAND: usize = 23;
}

/// Parent of each joint; the pelvis is the single root.
pub const PARENTS: [Option<usize>; NUM_JOINTS] = [
    None,
    Some(0),
    Some(0),
    Some(0),
    Some(1),
    Some(2),
    Some(3),
    Some(4),
    Some(5),
    Some(6),
    Some(7),
    Some(8),
    Some(9),
    Some(9),
    Some(9),
    Some(12),
    Some(13),
    Some(14),
    Some(16),
    Some(17),
    Some(18),
    Some(19),
    Some(20),
    Some(21),
];

// Rest joint positions before the global rescale to 1.70 m, T-pose,
// x lateral / y up / z forward.
const RAW_JOINTS: [[f64; 3]; NUM_JOINTS] = [
    [0.00, 0.00, 0.00],
    [0.09, -0.06, 0.00],
    [-0.09, -0.06, 0.00],
    [0.00, 0.10, 0.00],
    [0.10, -0.46, 0.00],
    [-0.10, -0.46, 0.00],
    [0.00, 0.22, 0.00],
    [0.10, -0.84, 0.00],
    [-0.10, -0.84, 0.00],
    [0.00, 0.32, 0.00],
    [0.11, -0.90, 0.06],
    [-0.11, -0.90, 0.06],
    [0.00, 0.48, 0.00],
    [0.07, 0.42, 0.00],
    [-0.07, 0.42, 0.00],
    [0.00, 0.58, 0.00],
    [0.18, 0.44, 0.00],
    [-0.18, 0.44, 0.00],
    [0.45, 0.44, 0.00],
    [-0.45, 0.44, 0.00],
    [0.70, 0.44, 0.00],
    [-0.70, 0.44, 0.00],
    [0.79, 0.44, 0.00],
    [-0.79, 0.44, 0.00],
];

// Capsule radius of the bone ending at each joint (index = child joint).
const BONE_RADIUS: [f64; NUM_JOINTS] = [
    0.0, // root, no bone
    0.10, 0.10, 0.13, // hips, lower spine
    0.07, 0.07, 0.13, // thighs, mid spine
    0.055, 0.055, 0.13, // shins, upper spine
    0.03, 0.03, // feet
    0.055, 0.07, 0.07, // neck, collars
    0.10, // head
    0.06, 0.06, // shoulders
    0.045, 0.045, // upper arms
    0.04, 0.04, // forearms
    0.025, 0.025, // hands
];

#[derive(Debug, thiserror::Error)]
pub enum BodyError {
    #[error("too few vertices: {got} (minimum {MIN_NUM_VERTICES})")]
    TooFewVertices { got: usize },
    #[error("invalid body parameters: {0}")]
    InvalidParams(String),
    #[error("malformed template: {0}")]
    MalformedTemplate(String),
}

/// Pose and shape parameters in the camera frame: 23 axis-angle joint
/// rotations, 10 shape coefficients, and the root axis-angle rotation and
/// metric translation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodyParams {
    pub theta: Vec<f64>,
    pub beta: Vec<f64>,
    pub theta_r: [f64; 3],
    pub theta_t: [f64; 3],
}

impl BodyParams {
    pub fn zeros() -> Self {
        Self {
            theta: vec![0.0; NUM_POSE_PARAMS],
            beta: vec![0.0; NUM_SHAPE_PARAMS],
            theta_r: [0.0; 3],
            theta_t: [0.0; 3],
        }
    }

    pub fn validate(&self) -> Result<(), BodyError> {
        if self.theta.len() != NUM_POSE_PARAMS {
            return Err(BodyError::InvalidParams(format!(
                "theta must have {NUM_POSE_PARAMS} entries, got {}",
                self.theta.len()
            )));
        }
        if self.beta.len() != NUM_SHAPE_PARAMS {
            return Err(BodyError::InvalidParams(format!(
                "beta must have {NUM_SHAPE_PARAMS} entries, got {}",
                self.beta.len()
            )));
        }
        let all = self
            .theta
            .iter()
            .chain(self.beta.iter())
            .chain(self.theta_r.iter())
            .chain(self.theta_t.iter());
        if !all.clone().all(|v| v.is_finite()) {
            return Err(BodyError::InvalidParams("non-finite parameter".into()));
        }
        let two_pi = std::f64::consts::TAU;
        for j in 0..NUM_BODY_JOINTS {
            let a = &self.theta[3 * j..3 * j + 3];
            let n = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
            if n >= two_pi {
                return Err(BodyError::InvalidParams(format!(
                    "axis-angle norm {n} for joint {} exceeds 2*pi",
                    j + 1
                )));
            }
        }
        let nr = Vector3::from_column_slice(&self.theta_r).norm();
        if nr >= two_pi {
            return Err(BodyError::InvalidParams(format!(
                "root axis-angle norm {nr} exceeds 2*pi"
            )));
        }
        Ok(())
    }

    pub fn translation(&self) -> Vector3<f64> {
        Vector3::from_column_slice(&self.theta_t)
    }
}

/// Posed body: kinematic joints and skinned vertices, both in the camera
/// frame. At the rest pose the joints equal `joint_regressor * vertices`
/// to machine precision; away from rest they agree within the documented
/// 2 cm regressor tolerance while staying exactly bone-length preserving.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyState {
    pub joints: Vec<Vector3<f64>>,
    pub vertices: Vec<Vector3<f64>>,
}

/// Immutable body template: kinematic tree, rest geometry, skinning
/// weights, joint regressor, and shape blend directions.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonTemplate {
    pub parent: [Option<usize>; NUM_JOINTS],
    pub rest_offsets: Vec<Vector3<f64>>,
    pub template_vertices: Vec<Vector3<f64>>,
    /// V rows of 24 convex weights; at most two are nonzero per row.
    pub skin_weights: Vec<Vec<f64>>,
    /// 24 rows of V convex weights.
    pub joint_regressor: Vec<Vec<f64>>,
    /// 10 displacement fields of V vectors each.
    pub shape_dirs: Vec<Vec<Vector3<f64>>>,
}

fn point_segment(p: &Vector3<f64>, a: &Vector3<f64>, b: &Vector3<f64>) -> (f64, Vector3<f64>) {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 {
        ((p - a).dot(&ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let q = a + ab * t;
    ((p - q).norm(), q)
}

/// Orthonormal frame perpendicular to `d`.
fn perp_frame(d: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let axis = if d.x.abs() < 0.9 {
        Vector3::x()
    } else {
        Vector3::y()
    };
    let n1 = d.cross(&axis).normalize();
    let n2 = d.cross(&n1).normalize();
    (n1, n2)
}

impl SkeletonTemplate {
    /// Deterministic procedural template. Vertices are laid out as one ring
    /// per joint (pelvis first, so vertex 0 sits at the pelvis), followed by
    /// three extremal cap vertices when the budget allows, then capsule
    /// samples distributed over the bones by length.
    pub fn default_template(num_vertices: usize) -> Result<Self, BodyError> {
        if num_vertices < MIN_NUM_VERTICES {
            return Err(BodyError::TooFewVertices { got: num_vertices });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(TEMPLATE_SEED);

        let raw: Vec<Vector3<f64>> = RAW_JOINTS
            .iter()
            .map(|p| Vector3::new(p[0], p[1], p[2]))
            .collect();
        let bones: Vec<(usize, usize)> = (1..NUM_JOINTS)
            .map(|j| (PARENTS[j].unwrap(), j))
            .collect();

        let ring = (num_vertices / 72).clamp(3, 8);
        let mut verts: Vec<Vector3<f64>> = Vec::with_capacity(num_vertices);

        // Joint rings, perpendicular to the parent bone (pelvis: horizontal).
        for j in 0..NUM_JOINTS {
            let dir = match PARENTS[j] {
                Some(p) => (raw[j] - raw[p]).normalize(),
                None => Vector3::y(),
            };
            let (n1, n2) = perp_frame(&dir);
            let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            for k in 0..ring {
                let a = phase + k as f64 * std::f64::consts::TAU / ring as f64;
                verts.push(raw[j] + (n1 * a.cos() + n2 * a.sin()) * RING_RADIUS);
            }
        }

        // Extremal caps: head top and both foot bottoms, so the height
        // extent is attained at leaf-anchored vertices.
        let mut remaining = num_vertices - verts.len();
        if remaining >= 3 {
            verts.push(raw[joint::HEAD] + Vector3::y() * BONE_RADIUS[joint::HEAD]);
            verts.push(raw[joint::LEFT_FOOT] - Vector3::y() * BONE_RADIUS[joint::LEFT_FOOT]);
            verts.push(raw[joint::RIGHT_FOOT] - Vector3::y() * BONE_RADIUS[joint::RIGHT_FOOT]);
            remaining -= 3;
        }

        // Capsule surface samples per bone, proportional to bone length.
        let lengths: Vec<f64> = bones.iter().map(|&(p, j)| (raw[j] - raw[p]).norm()).collect();
        let total_len: f64 = lengths.iter().sum();
        let mut counts: Vec<usize> = lengths
            .iter()
            .map(|l| (remaining as f64 * l / total_len).floor() as usize)
            .collect();
        let mut leftover = remaining - counts.iter().sum::<usize>();
        let mut order: Vec<usize> = (0..bones.len()).collect();
        order.sort_by(|&a, &b| {
            let fa = remaining as f64 * lengths[a] / total_len - counts[a] as f64;
            let fb = remaining as f64 * lengths[b] / total_len - counts[b] as f64;
            fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
        });
        for &i in &order {
            if leftover == 0 {
                break;
            }
            counts[i] += 1;
            leftover -= 1;
        }
        for (bi, &(p, j)) in bones.iter().enumerate() {
            let dir = (raw[j] - raw[p]).normalize();
            let (n1, n2) = perp_frame(&dir);
            let r = BONE_RADIUS[j];
            for _ in 0..counts[bi] {
                let t: f64 = rng.gen_range(0.1..0.9);
                let a: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let center = raw[p] + (raw[j] - raw[p]) * t;
                verts.push(center + (n1 * a.cos() + n2 * a.sin()) * r);
            }
        }
        debug_assert_eq!(verts.len(), num_vertices);

        // Rescale so the vertical vertex extent is exactly the rest height,
        // then re-center on the regressed pelvis (the pelvis ring mean).
        let y_max = verts.iter().map(|v| v.y).fold(f64::NEG_INFINITY, f64::max);
        let y_min = verts.iter().map(|v| v.y).fold(f64::INFINITY, f64::min);
        let g = HEIGHT_M / (y_max - y_min);
        let mut joints: Vec<Vector3<f64>> = raw.iter().map(|p| p * g).collect();
        for v in &mut verts {
            *v *= g;
        }
        let pelvis_mean = verts[..ring].iter().sum::<Vector3<f64>>() / ring as f64;
        for v in &mut verts {
            *v -= pelvis_mean;
        }
        for j in &mut joints {
            *j -= pelvis_mean;
        }

        // Skin weights from the two nearest bones; a bone binds to its
        // proximal joint's transform. Far-apart second bones drop out,
        // giving exact one-bone rows in limb interiors.
        let mut skin_weights = vec![vec![0.0; NUM_JOINTS]; num_vertices];
        for (vi, v) in verts.iter().enumerate() {
            let mut d: Vec<(f64, usize)> = bones
                .iter()
                .map(|&(p, j)| (point_segment(v, &joints[p], &joints[j]).0, p))
                .collect();
            d.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let (d1, c1) = d[0];
            let (d2, c2) = d[1];
            if c1 == c2 || d1 == 0.0 || d2 >= 2.0 * d1 {
                skin_weights[vi][c1] = 1.0;
            } else {
                let w1 = (d2 / d1 / 2.0).clamp(0.5, 1.0);
                skin_weights[vi][c1] = w1;
                skin_weights[vi][c2] = 1.0 - w1;
            }
        }

        // Uniform regressor over each joint's ring; the last entry is the
        // exact complement so every row sums to 1.0 in f64.
        let mut joint_regressor = vec![vec![0.0; num_vertices]; NUM_JOINTS];
        for j in 0..NUM_JOINTS {
            let w = 1.0 / ring as f64;
            let mut partial = 0.0;
            for k in 0..ring - 1 {
                joint_regressor[j][j * ring + k] = w;
                partial += w;
            }
            joint_regressor[j][j * ring + ring - 1] = 1.0 - partial;
        }

        // Shape direction 0: skeleton-anchored scaling. Every vertex moves
        // with the nearest skeleton point scaled about the pelvis; capsule
        // radii stay fixed. The coefficient is calibrated so one unit of
        // beta[0] adds exactly HEIGHT_GAIN_PER_UNIT to the vertex extent
        // (the extremes are anchored at the head and foot joints).
        let anchor_span = joints[joint::HEAD].y - joints[joint::LEFT_FOOT].y;
        let c0 = HEIGHT_GAIN_PER_UNIT / anchor_span;
        let mut shape_dirs: Vec<Vec<Vector3<f64>>> = Vec::with_capacity(NUM_SHAPE_PARAMS);
        let dir0: Vec<Vector3<f64>> = verts
            .iter()
            .map(|v| {
                let anchor = bones
                    .iter()
                    .map(|&(p, j)| point_segment(v, &joints[p], &joints[j]))
                    .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
                    .unwrap()
                    .1;
                anchor * c0
            })
            .collect();
        shape_dirs.push(dir0);

        // Directions 1..9: smooth low-frequency radial girth fields with a
        // strictly zero vertical component.
        let y_lo = verts.iter().map(|v| v.y).fold(f64::INFINITY, f64::min);
        let y_hi = verts.iter().map(|v| v.y).fold(f64::NEG_INFINITY, f64::max);
        for k in 1..NUM_SHAPE_PARAMS {
            let freq = 1.0 + ((k - 1) % 5) as f64;
            let phase = if k > 5 { std::f64::consts::FRAC_PI_2 } else { 0.0 };
            let dir: Vec<Vector3<f64>> = verts
                .iter()
                .map(|v| {
                    let t = (v.y - y_lo) / (y_hi - y_lo);
                    let radial = Vector3::new(v.x, 0.0, v.z);
                    let n = radial.norm();
                    if n < 1e-9 {
                        Vector3::zeros()
                    } else {
                        radial * (RADIAL_DIR_AMPLITUDE / n)
                            * (std::f64::consts::PI * freq * t + phase).cos()
                    }
                })
                .collect();
            shape_dirs.push(dir);
        }

        let rest_offsets = (0..NUM_JOINTS)
            .map(|j| match PARENTS[j] {
                Some(p) => joints[j] - joints[p],
                None => joints[j],
            })
            .collect();

        let tpl = Self {
            parent: PARENTS,
            rest_offsets,
            template_vertices: verts,
            skin_weights,
            joint_regressor,
            shape_dirs,
        };
        tpl.validate()?;
        Ok(tpl)
    }

    /// Variant whose height direction is an exact uniform scaling of the
    /// rest geometry about the pelvis. Under perspective projection this
    /// makes the body-scale / depth pairing an exact null direction of the
    /// reprojection cost.
    pub fn with_pure_scale_height_dir(mut self) -> Self {
        let c = HEIGHT_GAIN_PER_UNIT / HEIGHT_M;
        self.shape_dirs[0] = self.template_vertices.iter().map(|v| v * c).collect();
        self
    }

    pub fn num_vertices(&self) -> usize {
        self.template_vertices.len()
    }

    pub fn validate(&self) -> Result<(), BodyError> {
        let v = self.template_vertices.len();
        if v < MIN_NUM_VERTICES {
            return Err(BodyError::TooFewVertices { got: v });
        }
        let mut roots = 0;
        for (j, p) in self.parent.iter().enumerate() {
            match p {
                None => roots += 1,
                Some(p) if *p >= j => {
                    return Err(BodyError::MalformedTemplate(format!(
                        "parent {p} of joint {j} is not topologically earlier"
                    )))
                }
                _ => {}
            }
        }
        if roots != 1 {
            return Err(BodyError::MalformedTemplate(format!(
                "expected a single root, found {roots}"
            )));
        }
        if self.skin_weights.len() != v || self.joint_regressor.len() != NUM_JOINTS {
            return Err(BodyError::MalformedTemplate(
                "weight matrix dimensions do not match".into(),
            ));
        }
        for (i, row) in self.skin_weights.iter().enumerate() {
            if row.len() != NUM_JOINTS {
                return Err(BodyError::MalformedTemplate(format!(
                    "skin weight row {i} has {} entries",
                    row.len()
                )));
            }
            if row.iter().any(|&w| w < 0.0) || (row.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                return Err(BodyError::MalformedTemplate(format!(
                    "skin weight row {i} is not convex"
                )));
            }
        }
        for (j, row) in self.joint_regressor.iter().enumerate() {
            if row.len() != v {
                return Err(BodyError::MalformedTemplate(format!(
                    "regressor row {j} has {} entries",
                    row.len()
                )));
            }
            if row.iter().any(|&w| w < 0.0) || (row.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                return Err(BodyError::MalformedTemplate(format!(
                    "regressor row {j} is not convex"
                )));
            }
        }
        if self.shape_dirs.len() != NUM_SHAPE_PARAMS
            || self.shape_dirs.iter().any(|d| d.len() != v)
        {
            return Err(BodyError::MalformedTemplate(
                "shape direction dimensions do not match".into(),
            ));
        }
        Ok(())
    }

    /// Shape-blended rest geometry: vertices plus the linear combination of
    /// shape directions, and joints regressed from those vertices.
    pub fn shape_blend(&self, beta: &[f64]) -> (Vec<Vector3<f64>>, Vec<Vector3<f64>>) {
        assert_eq!(beta.len(), NUM_SHAPE_PARAMS, "beta must have 10 entries");
        let mut verts = self.template_vertices.clone();
        for (k, b) in beta.iter().enumerate() {
            if *b != 0.0 {
                for (v, d) in verts.iter_mut().zip(&self.shape_dirs[k]) {
                    *v += d * *b;
                }
            }
        }
        let joints = self.regress_joints(&verts);
        (verts, joints)
    }

    pub fn regress_joints(&self, vertices: &[Vector3<f64>]) -> Vec<Vector3<f64>> {
        self.joint_regressor
            .iter()
            .map(|row| {
                row.iter()
                    .zip(vertices)
                    .filter(|(w, _)| **w != 0.0)
                    .map(|(w, v)| v * *w)
                    .sum()
            })
            .collect()
    }

    /// Vertical extent (max - min along the up axis) of the shape-blended
    /// rest vertices, in meters.
    pub fn height(&self, beta: &[f64]) -> f64 {
        assert_eq!(beta.len(), NUM_SHAPE_PARAMS, "beta must have 10 entries");
        let mut y_max = f64::NEG_INFINITY;
        let mut y_min = f64::INFINITY;
        for (i, v) in self.template_vertices.iter().enumerate() {
            let mut y = v.y;
            for (k, b) in beta.iter().enumerate() {
                if *b != 0.0 {
                    y += self.shape_dirs[k][i].y * *b;
                }
            }
            y_max = y_max.max(y);
            y_min = y_min.min(y);
        }
        y_max - y_min
    }

    /// Forward model: shape blend, kinematic chain with the root rotation
    /// pivoting at the regressed pelvis, linear blend skinning, and the
    /// global translation applied last.
    pub fn forward(&self, params: &BodyParams) -> BodyState {
        let (rest_verts, rest_joints) = self.shape_blend(&params.beta);
        let t = params.translation();

        let mut rot = Vec::with_capacity(NUM_JOINTS);
        let mut pos = Vec::with_capacity(NUM_JOINTS);
        rot.push(Rotation3::new(Vector3::from_column_slice(&params.theta_r)));
        pos.push(rest_joints[0]);
        for j in 1..NUM_JOINTS {
            let p = self.parent[j].expect("non-root joint has a parent");
            let local = Rotation3::new(Vector3::from_column_slice(
                &params.theta[3 * (j - 1)..3 * j],
            ));
            rot.push(rot[p] * local);
            pos.push(rot[p] * (rest_joints[j] - rest_joints[p]) + pos[p]);
        }

        let vertices = rest_verts
            .iter()
            .zip(&self.skin_weights)
            .map(|(v, weights)| {
                let mut out = Vector3::zeros();
                for (c, w) in weights.iter().enumerate() {
                    if *w != 0.0 {
                        out += (rot[c] * (v - rest_joints[c]) + pos[c]) * *w;
                    }
                }
                out + t
            })
            .collect();
        let joints = pos.iter().map(|p| p + t).collect();
        BodyState { joints, vertices }
    }

    pub fn to_file(&self) -> TemplateFile {
        TemplateFile {
            version: TEMPLATE_SCHEMA.to_string(),
            parent: self
                .parent
                .iter()
                .map(|p| p.map(|v| v as i64).unwrap_or(-1))
                .collect(),
            rest_offsets: self.rest_offsets.iter().map(|v| [v.x, v.y, v.z]).collect(),
            vertices: self
                .template_vertices
                .iter()
                .map(|v| [v.x, v.y, v.z])
                .collect(),
            skin_weights: self.skin_weights.clone(),
            joint_regressor: self.joint_regressor.clone(),
            shape_dirs: self
                .shape_dirs
                .iter()
                .map(|d| d.iter().map(|v| [v.x, v.y, v.z]).collect())
                .collect(),
        }
    }

    pub fn from_file(file: TemplateFile) -> Result<Self, BodyError> {
        if file.version != TEMPLATE_SCHEMA {
            return Err(BodyError::MalformedTemplate(format!(
                "unsupported template version {:?}",
                file.version
            )));
        }
        if file.parent.len() != NUM_JOINTS {
            return Err(BodyError::MalformedTemplate(format!(
                "expected {NUM_JOINTS} parents, got {}",
                file.parent.len()
            )));
        }
        let mut parent = [None; NUM_JOINTS];
        for (j, p) in file.parent.iter().enumerate() {
            parent[j] = match p {
                -1 => None,
                p if *p >= 0 && (*p as usize) < NUM_JOINTS => Some(*p as usize),
                p => {
                    return Err(BodyError::MalformedTemplate(format!(
                        "parent index {p} out of range"
                    )))
                }
            };
        }
        let to_vec3 = |a: &[f64; 3]| Vector3::new(a[0], a[1], a[2]);
        let tpl = Self {
            parent,
            rest_offsets: file.rest_offsets.iter().map(to_vec3).collect(),
            template_vertices: file.vertices.iter().map(to_vec3).collect(),
            skin_weights: file.skin_weights,
            joint_regressor: file.joint_regressor,
            shape_dirs: file
                .shape_dirs
                .iter()
                .map(|d| d.iter().map(to_vec3).collect())
                .collect(),
        };
        tpl.validate()?;
        Ok(tpl)
    }
}

/// On-disk JSON schema of a body template.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TemplateFile {
    pub version: String,
    pub parent: Vec<i64>,
    pub rest_offsets: Vec<[f64; 3]>,
    pub vertices: Vec<[f64; 3]>,
    pub skin_weights: Vec<Vec<f64>>,
    pub joint_regressor: Vec<Vec<f64>>,
    pub shape_dirs: Vec<Vec<[f64; 3]>>,
}
