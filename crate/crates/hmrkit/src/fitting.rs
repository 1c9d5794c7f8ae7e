//! Optimization-based body fitting from 2D keypoints: a stacked residual of
//! confidence-weighted reprojection terms, pose/shape mimic terms, and an
//! optional height measurement term, minimized with damped least squares
//! over all 85 parameters (pose, shape, root rotation, translation).
//!
//! The Jacobian is computed by central differences (step
//! [`SolverConfig::jacobian_step`]); the damping is multiplicative on the
//! scaled normal-equation diagonal, raised on rejected steps and lowered on
//! accepted ones. Everything is deterministic given the inputs.

use crate::body::{BodyParams, SkeletonTemplate, NUM_BODY_JOINTS, NUM_JOINTS, NUM_POSE_PARAMS,
    NUM_SHAPE_PARAMS};
use crate::camera::{project, CameraFile, Intrinsics};
use crate::metrics::pa_mpjpe;
use nalgebra::{DMatrix, DVector, Vector3};
use serde::{Deserialize, Serialize};

/// Number of free parameters: 69 pose + 10 shape + 3 root rotation + 3
/// translation.
pub const NUM_PARAMS: usize = NUM_POSE_PARAMS + NUM_SHAPE_PARAMS + 6;

#[derive(Debug, thiserror::Error)]
pub enum FitError {
    #[error("joint {joint} has non-positive depth z = {z}")]
    NonPositiveDepth { joint: usize, z: f64 },
    #[error("initialization invalid: {0}")]
    Initialization(String),
    #[error("optimization diverged: {0}")]
    Diverged(String),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
}

/// Fitting targets: 24 image keypoints with confidences, the camera, the
/// mimic reference, and an optional metric height target.
#[derive(Debug, Clone)]
pub struct FitProblem {
    /// Per joint `[u, v, confidence]`, confidence in `[0, 1]`.
    pub target_kp2d: Vec<[f64; 3]>,
    pub intrinsics: Intrinsics,
    pub reference: BodyParams,
    pub target_height: Option<f64>,
    pub template: SkeletonTemplate,
}

impl FitProblem {
    pub fn validate(&self) -> Result<(), FitError> {
        if self.target_kp2d.len() != NUM_JOINTS {
            return Err(FitError::InvalidProblem(format!(
                "expected {NUM_JOINTS} keypoints, got {}",
                self.target_kp2d.len()
            )));
        }
        for (i, kp) in self.target_kp2d.iter().enumerate() {
            if !kp.iter().all(|v| v.is_finite()) {
                return Err(FitError::InvalidProblem(format!(
                    "keypoint {i} is not finite"
                )));
            }
            if !(0.0..=1.0).contains(&kp[2]) {
                return Err(FitError::InvalidProblem(format!(
                    "keypoint {i} confidence {} outside [0, 1]",
                    kp[2]
                )));
            }
        }
        self.intrinsics
            .validate()
            .map_err(|e| FitError::InvalidProblem(e.to_string()))?;
        self.reference
            .validate()
            .map_err(|e| FitError::InvalidProblem(e.to_string()))?;
        if let Some(h) = self.target_height {
            if !(h.is_finite() && h > 0.0) {
                return Err(FitError::InvalidProblem(format!(
                    "target height {h} must be positive"
                )));
            }
        }
        self.template
            .validate()
            .map_err(|e| FitError::InvalidProblem(e.to_string()))?;
        Ok(())
    }
}

/// Loss term weights. Residual entries are scaled by the square roots, so
/// the squared residual norm is the weighted sum of term costs. Terms with
/// zero weight are dropped from the residual vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub w_2d: f64,
    pub w_mimic_pose: f64,
    pub w_mimic_shape: f64,
    pub w_measure: f64,
}

impl Default for LossWeights {
    /// Chosen so a 1 cm height violation outweighs a 0.1 px reprojection
    /// shift; 2D residuals are in raw pixels.
    fn default() -> Self {
        Self {
            w_2d: 1.0,
            w_mimic_pose: 0.1,
            w_mimic_shape: 0.5,
            w_measure: 100.0,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<(), FitError> {
        let all = [self.w_2d, self.w_mimic_pose, self.w_mimic_shape, self.w_measure];
        if all.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(FitError::InvalidProblem(
                "weights must be finite and non-negative".into(),
            ));
        }
        if all.iter().all(|&w| w == 0.0) {
            return Err(FitError::InvalidProblem(
                "at least one weight must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub initial_damping: f64,
    pub damping_up: f64,
    pub damping_down: f64,
    /// Relative accepted-cost change below which the solve stops.
    pub convergence_tol: f64,
    pub jacobian_step: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 100,
            initial_damping: 1e-3,
            damping_up: 10.0,
            damping_down: 0.5,
            convergence_tol: 1e-10,
            jacobian_step: 1e-6,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), FitError> {
        if self.max_iters == 0
            || !(self.initial_damping > 0.0)
            || !(self.damping_up > 1.0)
            || !(self.damping_down > 0.0 && self.damping_down < 1.0)
            || !(self.convergence_tol > 0.0)
            || !(self.jacobian_step > 0.0)
        {
            return Err(FitError::InvalidProblem(
                "solver config violates positivity/ordering constraints".into(),
            ));
        }
        Ok(())
    }
}

/// Weighted squared cost per loss term.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub kp2d: f64,
    pub mimic_pose: f64,
    pub mimic_shape: f64,
    pub measurement: f64,
}

impl CostBreakdown {
    pub fn total(&self) -> f64 {
        self.kp2d + self.mimic_pose + self.mimic_shape + self.measurement
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: BodyParams,
    pub final_cost: f64,
    /// Unweighted mean pixel error over joints with positive confidence.
    pub mean_kp2d_error: f64,
    pub iterations: usize,
    pub converged: bool,
    pub breakdown: CostBreakdown,
}

/// Pack parameters as `[theta, beta, theta_r, theta_t]`.
pub fn params_to_vec(p: &BodyParams) -> DVector<f64> {
    let mut x = DVector::zeros(NUM_PARAMS);
    x.as_mut_slice()[..NUM_POSE_PARAMS].copy_from_slice(&p.theta);
    x.as_mut_slice()[NUM_POSE_PARAMS..NUM_POSE_PARAMS + NUM_SHAPE_PARAMS]
        .copy_from_slice(&p.beta);
    x.as_mut_slice()[NUM_POSE_PARAMS + NUM_SHAPE_PARAMS..NUM_PARAMS - 3]
        .copy_from_slice(&p.theta_r);
    x.as_mut_slice()[NUM_PARAMS - 3..].copy_from_slice(&p.theta_t);
    x
}

/// Unpack a parameter vector, wrapping any axis-angle block whose norm
/// reached `2*pi` back into range (the rotation is unchanged).
pub fn params_from_vec(x: &DVector<f64>) -> BodyParams {
    let mut p = BodyParams {
        theta: x.as_slice()[..NUM_POSE_PARAMS].to_vec(),
        beta: x.as_slice()[NUM_POSE_PARAMS..NUM_POSE_PARAMS + NUM_SHAPE_PARAMS].to_vec(),
        theta_r: [0.0; 3],
        theta_t: [0.0; 3],
    };
    p.theta_r
        .copy_from_slice(&x.as_slice()[NUM_POSE_PARAMS + NUM_SHAPE_PARAMS..NUM_PARAMS - 3]);
    p.theta_t.copy_from_slice(&x.as_slice()[NUM_PARAMS - 3..]);
    for j in 0..NUM_BODY_JOINTS {
        wrap_axis_angle(&mut p.theta[3 * j..3 * j + 3]);
    }
    let mut r = p.theta_r;
    wrap_axis_angle(&mut r);
    p.theta_r = r;
    p
}

fn wrap_axis_angle(aa: &mut [f64]) {
    let n = (aa[0] * aa[0] + aa[1] * aa[1] + aa[2] * aa[2]).sqrt();
    if n >= std::f64::consts::TAU {
        let wrapped = n % std::f64::consts::TAU;
        let f = wrapped / n;
        for c in aa.iter_mut() {
            *c *= f;
        }
    }
}

/// Stacked weighted residual vector. Ordering: 2D reprojection (2 entries
/// per joint), pose mimic (69 + 3), shape mimic (10), measurement (1).
pub fn residuals(
    params: &BodyParams,
    prob: &FitProblem,
    w: &LossWeights,
) -> Result<DVector<f64>, FitError> {
    let mut out = Vec::with_capacity(2 * NUM_JOINTS + NUM_POSE_PARAMS + 3 + NUM_SHAPE_PARAMS + 1);
    let state = prob.template.forward(params);

    if w.w_2d > 0.0 {
        let sw = w.w_2d.sqrt();
        for (j, (joint, kp)) in state.joints.iter().zip(&prob.target_kp2d).enumerate() {
            if joint.z <= 0.0 {
                return Err(FitError::NonPositiveDepth { joint: j, z: joint.z });
            }
            let px = project(joint, &prob.intrinsics)
                .expect("depth checked above");
            let c = kp[2];
            out.push(sw * c * (px.u - kp[0]));
            out.push(sw * c * (px.v - kp[1]));
        }
    }
    if w.w_mimic_pose > 0.0 {
        let sw = w.w_mimic_pose.sqrt();
        for (a, b) in params.theta.iter().zip(&prob.reference.theta) {
            out.push(sw * (a - b));
        }
        for (a, b) in params.theta_r.iter().zip(&prob.reference.theta_r) {
            out.push(sw * (a - b));
        }
    }
    if w.w_mimic_shape > 0.0 {
        let sw = w.w_mimic_shape.sqrt();
        for (a, b) in params.beta.iter().zip(&prob.reference.beta) {
            out.push(sw * (a - b));
        }
    }
    if w.w_measure > 0.0 {
        if let Some(h) = prob.target_height {
            out.push(w.w_measure.sqrt() * (prob.template.height(&params.beta) - h));
        }
    }
    Ok(DVector::from_vec(out))
}

/// Per-term weighted costs of a residual vector (same layout as
/// [`residuals`]).
pub fn breakdown(r: &DVector<f64>, prob: &FitProblem, w: &LossWeights) -> CostBreakdown {
    let mut b = CostBreakdown::default();
    let mut i = 0;
    let mut take = |n: usize| {
        let s: f64 = r.as_slice()[i..i + n].iter().map(|v| v * v).sum();
        i += n;
        s
    };
    if w.w_2d > 0.0 {
        b.kp2d = take(2 * NUM_JOINTS);
    }
    if w.w_mimic_pose > 0.0 {
        b.mimic_pose = take(NUM_POSE_PARAMS + 3);
    }
    if w.w_mimic_shape > 0.0 {
        b.mimic_shape = take(NUM_SHAPE_PARAMS);
    }
    if w.w_measure > 0.0 && prob.target_height.is_some() {
        b.measurement = take(1);
    }
    b
}

fn residuals_at(
    x: &DVector<f64>,
    prob: &FitProblem,
    w: &LossWeights,
) -> Result<DVector<f64>, FitError> {
    residuals(&params_from_vec(x), prob, w)
}

/// Central-difference Jacobian of the residual vector.
pub fn numeric_jacobian(
    x: &DVector<f64>,
    prob: &FitProblem,
    w: &LossWeights,
    step: f64,
) -> Result<DMatrix<f64>, FitError> {
    let m = residuals_at(x, prob, w)?.len();
    let mut jac = DMatrix::zeros(m, NUM_PARAMS);
    let mut xp = x.clone();
    for col in 0..NUM_PARAMS {
        let orig = xp[col];
        xp[col] = orig + step;
        let rp = residuals_at(&xp, prob, w)?;
        xp[col] = orig - step;
        let rm = residuals_at(&xp, prob, w)?;
        xp[col] = orig;
        for row in 0..m {
            jac[(row, col)] = (rp[row] - rm[row]) / (2.0 * step);
        }
    }
    Ok(jac)
}

/// Unweighted mean pixel error over joints with positive confidence.
pub fn mean_kp2d_error(params: &BodyParams, prob: &FitProblem) -> Result<f64, FitError> {
    let state = prob.template.forward(params);
    let mut sum = 0.0;
    let mut n = 0usize;
    for (j, (joint, kp)) in state.joints.iter().zip(&prob.target_kp2d).enumerate() {
        if kp[2] <= 0.0 {
            continue;
        }
        if joint.z <= 0.0 {
            return Err(FitError::NonPositiveDepth { joint: j, z: joint.z });
        }
        let px = project(joint, &prob.intrinsics).expect("depth checked above");
        sum += ((px.u - kp[0]).powi(2) + (px.v - kp[1]).powi(2)).sqrt();
        n += 1;
    }
    Ok(if n == 0 { 0.0 } else { sum / n as f64 })
}

/// Damped least-squares fit. The accepted-cost sequence is non-increasing
/// and the result is deterministic given identical inputs.
pub fn fit(
    prob: &FitProblem,
    w: &LossWeights,
    init: &BodyParams,
    cfg: &SolverConfig,
) -> Result<FitResult, FitError> {
    prob.validate()?;
    w.validate()?;
    cfg.validate()?;
    init.validate()
        .map_err(|e| FitError::Initialization(e.to_string()))?;

    let mut x = params_to_vec(init);
    let mut r = residuals_at(&x, prob, w).map_err(|e| match e {
        FitError::NonPositiveDepth { joint, z } => FitError::Initialization(format!(
            "joint {joint} starts behind the camera (z = {z})"
        )),
        other => other,
    })?;
    let mut cost = r.norm_squared();
    if !cost.is_finite() {
        return Err(FitError::Diverged(format!("initial cost is {cost}")));
    }

    let mut lambda = cfg.initial_damping;
    let mut iterations = 0;
    let mut converged = cost == 0.0;

    while !converged && iterations < cfg.max_iters {
        iterations += 1;
        let jac = numeric_jacobian(&x, prob, w, cfg.jacobian_step)
            .map_err(|e| FitError::Diverged(format!("jacobian evaluation failed: {e}")))?;
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * &r;

        let mut accepted = false;
        while lambda < 1e13 {
            let mut a = jtj.clone();
            for i in 0..NUM_PARAMS {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-12);
            }
            let delta = match a.cholesky() {
                Some(chol) => chol.solve(&(-&g)),
                None => {
                    lambda *= cfg.damping_up;
                    continue;
                }
            };
            let xt = &x + &delta;
            match residuals_at(&xt, prob, w) {
                Ok(rt) => {
                    let ct = rt.norm_squared();
                    if ct.is_finite() && ct <= cost {
                        let rel = (cost - ct) / cost.max(f64::MIN_POSITIVE);
                        x = xt;
                        r = rt;
                        cost = ct;
                        lambda *= cfg.damping_down;
                        if rel <= cfg.convergence_tol {
                            converged = true;
                        }
                        accepted = true;
                        break;
                    }
                    lambda *= cfg.damping_up;
                }
                Err(_) => {
                    // Trial stepped outside the visual cone; shrink the step.
                    lambda *= cfg.damping_up;
                }
            }
        }
        if !accepted {
            break;
        }
    }

    let params = params_from_vec(&x);
    let mean = mean_kp2d_error(&params, prob)?;
    Ok(FitResult {
        breakdown: breakdown(&r, prob, w),
        params,
        final_cost: cost,
        mean_kp2d_error: mean,
        iterations,
        converged,
    })
}

/// One fit per target height, warm-started from the previous solution, with
/// the pairwise Procrustes-aligned joint error matrix over the solutions.
#[derive(Debug, Clone)]
pub struct HeightSweepResult {
    pub heights: Vec<f64>,
    pub fits: Vec<Result<FitResult, String>>,
    /// Symmetric with zero diagonal; entries touching a failed fit are NaN.
    pub pa_mpjpe_matrix: Vec<Vec<f64>>,
    pub max_pairwise_pa_mpjpe: f64,
}

pub fn height_sweep(
    prob: &FitProblem,
    heights: &[f64],
    w: &LossWeights,
    init: &BodyParams,
    cfg: &SolverConfig,
) -> Result<HeightSweepResult, FitError> {
    if heights.is_empty() {
        return Err(FitError::InvalidProblem("no sweep heights given".into()));
    }
    if heights.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
        return Err(FitError::InvalidProblem(
            "sweep heights must be positive".into(),
        ));
    }
    if w.w_measure == 0.0 {
        return Err(FitError::InvalidProblem(
            "height sweep requires a positive measurement weight".into(),
        ));
    }

    let mut fits: Vec<Result<FitResult, String>> = Vec::with_capacity(heights.len());
    let mut warm = init.clone();
    for &h in heights {
        let mut p = prob.clone();
        p.target_height = Some(h);
        match fit(&p, w, &warm, cfg) {
            Ok(res) => {
                warm = res.params.clone();
                fits.push(Ok(res));
            }
            Err(e) => fits.push(Err(e.to_string())),
        }
    }

    let joints: Vec<Option<Vec<Vector3<f64>>>> = fits
        .iter()
        .map(|f| {
            f.as_ref()
                .ok()
                .map(|res| prob.template.forward(&res.params).joints)
        })
        .collect();
    let n = heights.len();
    let mut matrix = vec![vec![0.0; n]; n];
    let mut max_pair: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            matrix[i][j] = f64::NAN;
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if let (Some(a), Some(b)) = (&joints[i], &joints[j]) {
                let v = pa_mpjpe(a, b).map_err(|e| FitError::Diverged(e.to_string()))?;
                matrix[i][j] = v;
                matrix[j][i] = v;
                max_pair = max_pair.max(v);
            }
        }
    }
    Ok(HeightSweepResult {
        heights: heights.to_vec(),
        fits,
        pa_mpjpe_matrix: matrix,
        max_pairwise_pa_mpjpe: max_pair,
    })
}

/// On-disk JSON schema of a fit problem (the template travels separately).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitProblemFile {
    pub keypoints: Vec<[f64; 3]>,
    pub camera: CameraFile,
    pub reference: BodyParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_height: Option<f64>,
}

impl FitProblemFile {
    pub fn into_problem(self, template: SkeletonTemplate) -> Result<FitProblem, FitError> {
        let intrinsics = self
            .camera
            .intrinsics()
            .map_err(|e| FitError::InvalidProblem(e.to_string()))?;
        let prob = FitProblem {
            target_kp2d: self.keypoints,
            intrinsics,
            reference: self.reference,
            target_height: self.target_height,
            template,
        };
        prob.validate()?;
        Ok(prob)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::{joint, SkeletonTemplate, DEFAULT_NUM_VERTICES, HEIGHT_GAIN_PER_UNIT,
        HEIGHT_M};
    use approx::assert_relative_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn template() -> SkeletonTemplate {
        SkeletonTemplate::default_template(DEFAULT_NUM_VERTICES).unwrap()
    }

    fn truth_params(depth: f64) -> BodyParams {
        let mut p = BodyParams::zeros();
        p.theta_t = [0.0, 0.0, depth];
        p
    }

    fn synthetic_problem(tpl: &SkeletonTemplate, truth: &BodyParams) -> FitProblem {
        let k = Intrinsics::new(1500.0, 1500.0, 960.0, 540.0).unwrap();
        let state = tpl.forward(truth);
        let target_kp2d = state
            .joints
            .iter()
            .map(|j| {
                let px = project(j, &k).unwrap();
                [px.u, px.v, 1.0]
            })
            .collect();
        FitProblem {
            target_kp2d,
            intrinsics: k,
            reference: truth.clone(),
            target_height: Some(tpl.height(&truth.beta)),
            template: tpl.clone(),
        }
    }

    /// Perturb every joint by a rotation of at most `angle` radians and the
    /// translation by at most `trans` meters per axis.
    fn perturb(p: &BodyParams, rng: &mut StdRng, angle: f64, trans: f64) -> BodyParams {
        let mut q = p.clone();
        let mut bump = |aa: &mut [f64]| {
            let axis = Vector3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            )
            .normalize();
            let a = axis * rng.gen_range(0.0..angle);
            aa[0] += a.x;
            aa[1] += a.y;
            aa[2] += a.z;
        };
        for j in 0..NUM_BODY_JOINTS {
            bump(&mut q.theta[3 * j..3 * j + 3]);
        }
        let mut r = q.theta_r;
        bump(&mut r);
        q.theta_r = r;
        for t in q.theta_t.iter_mut() {
            *t += rng.gen_range(-trans..trans);
        }
        q
    }

    #[test]
    fn residuals_vanish_at_reference_generated_targets() {
        let tpl = template();
        let truth = truth_params(6.0);
        let prob = synthetic_problem(&tpl, &truth);
        let r = residuals(&truth, &prob, &LossWeights::default()).unwrap();
        assert!(r.norm() < 1e-9, "residual norm {}", r.norm());
    }

    #[test]
    fn residual_layout_contract() {
        let tpl = template();
        let truth = truth_params(6.0);
        let prob = synthetic_problem(&tpl, &truth);
        let only_2d = LossWeights {
            w_2d: 1.0,
            w_mimic_pose: 0.0,
            w_mimic_shape: 0.0,
            w_measure: 0.0,
        };
        let r = residuals(&truth, &prob, &only_2d).unwrap();
        assert_eq!(r.len(), 2 * NUM_JOINTS);

        let all = LossWeights::default();
        let r = residuals(&truth, &prob, &all).unwrap();
        assert_eq!(r.len(), 48 + 72 + 10 + 1);

        let mut no_height = prob.clone();
        no_height.target_height = None;
        let r = residuals(&truth, &no_height, &all).unwrap();
        assert_eq!(r.len(), 48 + 72 + 10);
    }

    #[test]
    fn breakdown_sums_to_squared_norm() {
        let tpl = template();
        let truth = truth_params(5.0);
        let prob = synthetic_problem(&tpl, &truth);
        let mut rng = StdRng::seed_from_u64(2);
        let mut p = perturb(&truth, &mut rng, 0.05, 0.1);
        for b in p.beta.iter_mut() {
            *b += rng.gen_range(-0.3..0.3);
        }
        let w = LossWeights::default();
        let r = residuals(&p, &prob, &w).unwrap();
        let b = breakdown(&r, &prob, &w);
        // Independent summation oracle.
        let total: f64 = r.iter().map(|v| v * v).sum();
        assert_relative_eq!(b.total(), total, max_relative = 1e-12);
        assert!(b.kp2d > 0.0 && b.mimic_pose > 0.0 && b.mimic_shape > 0.0);
    }

    #[test]
    fn residuals_flag_non_positive_depth() {
        let tpl = template();
        let mut behind = BodyParams::zeros();
        behind.theta_t = [0.0, 0.0, -1.0];
        let prob = synthetic_problem(&tpl, &truth_params(5.0));
        assert!(matches!(
            residuals(&behind, &prob, &LossWeights::default()),
            Err(FitError::NonPositiveDepth { .. })
        ));
    }

    #[test]
    fn fit_round_trip_recovers_translation() {
        let tpl = template();
        let truth = truth_params(6.0);
        let prob = synthetic_problem(&tpl, &truth);
        let mut rng = StdRng::seed_from_u64(3);
        let init = perturb(&truth, &mut rng, 5f64.to_radians(), 0.2);
        let res = fit(&prob, &LossWeights::default(), &init, &SolverConfig::default()).unwrap();
        assert!(res.converged);
        assert!(res.mean_kp2d_error < 0.1, "2d error {}", res.mean_kp2d_error);
        let t = res.params.translation();
        let tt = truth.translation();
        assert!(
            (t - tt).norm() < 0.01 * tt.norm(),
            "translation error {} vs truth {tt:?}",
            (t - tt).norm()
        );
    }

    #[test]
    fn fit_from_optimum_converges_immediately() {
        let tpl = template();
        let truth = truth_params(6.0);
        let prob = synthetic_problem(&tpl, &truth);
        let res = fit(&prob, &LossWeights::default(), &truth, &SolverConfig::default()).unwrap();
        assert!(res.converged);
        assert!(res.iterations <= 1);
        assert!(res.final_cost < 1e-18);
    }

    #[test]
    fn fit_rejects_init_behind_camera() {
        let tpl = template();
        let prob = synthetic_problem(&tpl, &truth_params(5.0));
        let mut behind = BodyParams::zeros();
        behind.theta_t = [0.0, 0.0, -2.0];
        assert!(matches!(
            fit(&prob, &LossWeights::default(), &behind, &SolverConfig::default()),
            Err(FitError::Initialization(_))
        ));
    }

    #[test]
    fn fit_is_deterministic() {
        let tpl = template();
        let truth = truth_params(6.0);
        let prob = synthetic_problem(&tpl, &truth);
        let mut rng = StdRng::seed_from_u64(4);
        let init = perturb(&truth, &mut rng, 0.05, 0.1);
        let a = fit(&prob, &LossWeights::default(), &init, &SolverConfig::default()).unwrap();
        let b = fit(&prob, &LossWeights::default(), &init, &SolverConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn scale_depth_ambiguity_leaves_2d_residuals_unchanged() {
        // With the measurement term absent and a pure-scaling height
        // direction, scaling the body and its translation together is an
        // exact null direction of the reprojection residuals.
        let tpl = template().with_pure_scale_height_dir();
        let truth = truth_params(6.0);
        let prob = synthetic_problem(&tpl, &truth);
        let only_2d = LossWeights {
            w_2d: 1.0,
            w_mimic_pose: 0.0,
            w_mimic_shape: 0.0,
            w_measure: 0.0,
        };
        let c = HEIGHT_GAIN_PER_UNIT / HEIGHT_M;
        for alpha in [0.8, 1.25, 2.0] {
            let mut scaled = truth.clone();
            scaled.beta[0] = (alpha - 1.0) / c;
            for t in scaled.theta_t.iter_mut() {
                *t *= alpha;
            }
            let r = residuals(&scaled, &prob, &only_2d).unwrap();
            assert!(r.norm() < 1e-8, "alpha {alpha}: residual norm {}", r.norm());
        }
    }

    #[test]
    fn null_direction_is_orthogonal_to_2d_gradient() {
        // Converge a mimic-regularized fit whose reference pose is pulled
        // slightly off the target-generating pose, so the 2D term alone has
        // a nonzero gradient at the optimum; the scale/depth direction must
        // still be orthogonal to it.
        let tpl = template().with_pure_scale_height_dir();
        let truth = truth_params(6.0);
        let mut prob = synthetic_problem(&tpl, &truth);
        prob.target_height = None;
        let mut reference = truth.clone();
        for t in reference.theta.iter_mut().take(12) {
            *t += 0.03;
        }
        prob.reference = reference;
        // The huge shape anchor keeps the fitted beta[1..] at zero, where
        // the scale/depth family is exact.
        let w = LossWeights {
            w_2d: 1.0,
            w_mimic_pose: 1.0,
            w_mimic_shape: 1e6,
            w_measure: 0.0,
        };
        let res = fit(&prob, &w, &truth, &SolverConfig::default()).unwrap();
        assert!(res.converged);

        let only_2d = LossWeights {
            w_2d: 1.0,
            w_mimic_pose: 0.0,
            w_mimic_shape: 0.0,
            w_measure: 0.0,
        };
        let x = params_to_vec(&res.params);
        let jac = numeric_jacobian(&x, &prob, &only_2d, 1e-6).unwrap();
        let r2d = residuals(&res.params, &prob, &only_2d).unwrap();
        let grad = jac.transpose() * r2d * 2.0;

        // Directional derivative of the 2D cost along the scale/depth
        // pairing, evaluated on the curve itself.
        let c = HEIGHT_GAIN_PER_UNIT / HEIGHT_M;
        let s_star = 1.0 + c * res.params.beta[0];
        let cost_on_curve = |t: f64| -> f64 {
            let mut p = res.params.clone();
            p.beta[0] += t;
            let ratio = (1.0 + c * p.beta[0]) / s_star;
            for i in 0..3 {
                p.theta_t[i] = res.params.theta_t[i] * ratio;
            }
            residuals(&p, &prob, &only_2d).unwrap().norm_squared()
        };
        let h = 1e-3;
        let dd = (cost_on_curve(h) - cost_on_curve(-h)) / (2.0 * h);
        let mut dir = DVector::zeros(NUM_PARAMS);
        dir[NUM_POSE_PARAMS] = 1.0; // beta[0]
        for i in 0..3 {
            dir[NUM_PARAMS - 3 + i] = res.params.theta_t[i] * c / s_star;
        }
        let ratio = dd.abs() / (grad.norm() * dir.norm());
        assert!(grad.norm() > 1e-6, "2d gradient degenerate: {}", grad.norm());
        assert!(ratio <= 1e-6, "null-direction derivative ratio {ratio}");
    }

    #[test]
    fn jacobian_step_sizes_agree() {
        let tpl = template();
        let truth = truth_params(6.0);
        let prob = synthetic_problem(&tpl, &truth);
        let w = LossWeights::default();
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..10 {
            let p = perturb(&truth, &mut rng, 5f64.to_radians(), 0.1);
            let x = params_to_vec(&p);
            let j5 = numeric_jacobian(&x, &prob, &w, 1e-5).unwrap();
            let j7 = numeric_jacobian(&x, &prob, &w, 1e-7).unwrap();
            for row in 0..j5.nrows() {
                for col in 0..j5.ncols() {
                    let (a, b) = (j5[(row, col)], j7[(row, col)]);
                    assert!(
                        (a - b).abs() <= 1e-5 * a.abs().max(b.abs()) + 1e-6,
                        "jacobian ({row},{col}): {a} vs {b}"
                    );
                }
            }
        }
    }

    #[test]
    fn warm_start_independence_at_convergence() {
        let tpl = template();
        let truth = truth_params(6.0);
        let mut prob = synthetic_problem(&tpl, &truth);
        // A slightly offset reference keeps the optimum cost away from zero.
        let mut reference = truth.clone();
        for t in reference.theta.iter_mut().take(9) {
            *t += 0.02;
        }
        prob.reference = reference;
        // The strong mimic anchor keeps the 5-degree neighborhood convex.
        let w = LossWeights {
            w_2d: 1.0,
            w_mimic_pose: 5.0,
            w_mimic_shape: 1.0,
            w_measure: 100.0,
        };
        let cfg = SolverConfig {
            convergence_tol: 1e-12,
            max_iters: 300,
            ..Default::default()
        };
        let mut rng = StdRng::seed_from_u64(6);
        let costs: Vec<f64> = (0..5)
            .map(|_| {
                let init = perturb(&truth, &mut rng, 5f64.to_radians(), 0.05);
                let res = fit(&prob, &w, &init, &cfg).unwrap();
                assert!(res.converged, "fit stalled at cost {}", res.final_cost);
                res.final_cost
            })
            .collect();
        let max = costs.iter().cloned().fold(f64::MIN, f64::max);
        let min = costs.iter().cloned().fold(f64::MAX, f64::min);
        assert!(
            (max - min) <= 1e-6 * max,
            "costs spread too wide: {costs:?}"
        );
    }

    #[test]
    fn height_sweep_structure() {
        let tpl = template();
        let truth = truth_params(6.0);
        let prob = synthetic_problem(&tpl, &truth);
        let h0 = tpl.height(&truth.beta);
        let w = LossWeights::default();
        let cfg = SolverConfig::default();

        // Single height: no off-diagonal comparisons.
        let single = height_sweep(&prob, &[h0], &w, &truth, &cfg).unwrap();
        assert_eq!(single.max_pairwise_pa_mpjpe, 0.0);
        assert_eq!(single.pa_mpjpe_matrix, vec![vec![0.0]]);

        let heights: Vec<f64> = (0..5).map(|i| h0 * (0.9 + 0.05 * i as f64)).collect();
        let sweep = height_sweep(&prob, &heights, &w, &truth, &cfg).unwrap();
        assert_eq!(sweep.fits.len(), 5);
        let mut depths = Vec::new();
        for f in &sweep.fits {
            let f = f.as_ref().unwrap();
            assert!(
                f.mean_kp2d_error < 0.5,
                "2d error {} too large",
                f.mean_kp2d_error
            );
            depths.push(f.params.theta_t[2]);
        }
        for pair in depths.windows(2) {
            assert!(pair[1] > pair[0], "depth not monotone: {depths:?}");
        }
        assert!(sweep.max_pairwise_pa_mpjpe > 0.0);
        // Matrix symmetry with zero diagonal.
        for i in 0..5 {
            assert_eq!(sweep.pa_mpjpe_matrix[i][i], 0.0);
            for j in 0..5 {
                assert_eq!(sweep.pa_mpjpe_matrix[i][j], sweep.pa_mpjpe_matrix[j][i]);
            }
        }
    }

    #[test]
    fn problem_file_round_trip() {
        let tpl = template();
        let truth = truth_params(5.0);
        let prob = synthetic_problem(&tpl, &truth);
        let file = FitProblemFile {
            keypoints: prob.target_kp2d.clone(),
            camera: CameraFile {
                fx: 1500.0,
                fy: 1500.0,
                cx: 960.0,
                cy: 540.0,
                width: 1920,
                height: 1080,
            },
            reference: truth.clone(),
            target_height: prob.target_height,
        };
        let json = serde_json::to_string(&file).unwrap();
        let parsed: FitProblemFile = serde_json::from_str(&json).unwrap();
        let rebuilt = parsed.into_problem(tpl).unwrap();
        assert_eq!(rebuilt.target_kp2d, prob.target_kp2d);
        assert_eq!(rebuilt.target_height, prob.target_height);
    }

    #[test]
    fn weights_and_config_validation() {
        let zero = LossWeights {
            w_2d: 0.0,
            w_mimic_pose: 0.0,
            w_mimic_shape: 0.0,
            w_measure: 0.0,
        };
        assert!(zero.validate().is_err());
        let neg = LossWeights {
            w_2d: -1.0,
            ..LossWeights::default()
        };
        assert!(neg.validate().is_err());
        let bad_cfg = SolverConfig {
            damping_down: 1.5,
            ..Default::default()
        };
        assert!(bad_cfg.validate().is_err());
    }

    #[test]
    fn axis_angle_wrapping_preserves_rotation() {
        let mut x = DVector::zeros(NUM_PARAMS);
        // Joint 0 axis-angle with norm just above 2*pi.
        x[0] = 6.4;
        let p = params_from_vec(&x);
        assert!(p.validate().is_ok());
        let expected = nalgebra::Rotation3::new(Vector3::new(6.4, 0.0, 0.0));
        let got = nalgebra::Rotation3::new(Vector3::new(p.theta[0], p.theta[1], p.theta[2]));
        assert_relative_eq!(expected.into_inner(), got.into_inner(), epsilon = 1e-12);
        let _ = joint::PELVIS;
    }
}
