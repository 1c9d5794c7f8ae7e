//! Command-line surface: ray-map export, keypoint fitting, the height
//! ambiguity sweep, metric evaluation, and synthetic dataset generation.
//!
//! Exit codes are stable per error class: 0 success, 1 usage, 2 input
//! parse or i/o, 3 numerical failure. All commands are deterministic given
//! identical inputs and flags.

use crate::body::{BodyParams, SkeletonTemplate, DEFAULT_NUM_VERTICES};
use crate::camera::{crop_intrinsics, ray_map, unproject_ray, BBox, CameraFile, Pixel, RayMap};
use crate::fitting::{
    fit, height_sweep, FitError, FitProblemFile, FitResult, LossWeights, SolverConfig,
};
use crate::metrics::{
    erve, rte, seq_mpjpe, seq_pa_mpjpe, w_mpjpe_100, wa_mpjpe_100, JointSeq, JointSeqFile,
    MetricError, MetricReport,
};
use crate::synth::{make_trajectory, SceneSampleFile, SynthError, TrajectorySpec};
use clap::{ArgAction, Parser, Subcommand};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

/// Outcome of one command: written artifact paths and a one-line summary.
#[derive(Debug, Clone)]
pub struct CommandOutcome {
    pub artifacts: Vec<PathBuf>,
    pub summary: String,
}

#[derive(Debug, Parser)]
#[command(name = "hmrkit", version, about = "Metric camera, body fitting, and \
world-frame evaluation toolkit")]
pub struct Cli {
    /// Override the random seed of seeded commands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Suppress the artifact and summary lines.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Export a dense camera ray map (binary, optional JSON), optionally
    /// with a crop ray map checked against the full map.
    Raymap {
        /// Camera JSON ({fx, fy, cx, cy, width, height}).
        #[arg(long)]
        camera: PathBuf,
        /// Square crop JSON ({u0, v0, side, scale}).
        #[arg(long)]
        bbox: Option<PathBuf>,
        /// Output path of the binary ray map.
        #[arg(long)]
        out: PathBuf,
        /// Optional lossless JSON twin of the binary map.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Unit-normalized rays (pass false for the homogeneous z=1 form).
        #[arg(long, default_value_t = true, action = ArgAction::Set)]
        normalize: bool,
    },
    /// Fit body parameters to a keypoint problem file.
    Fit {
        /// Problem JSON ({keypoints, camera, reference, target_height?}).
        #[arg(long)]
        problem: PathBuf,
        /// Body template JSON; the built-in template when omitted.
        #[arg(long)]
        template: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = LossWeights::default().w_2d)]
        w_2d: f64,
        #[arg(long, default_value_t = LossWeights::default().w_mimic_pose)]
        w_mimic_pose: f64,
        #[arg(long, default_value_t = LossWeights::default().w_mimic_shape)]
        w_mimic_shape: f64,
        #[arg(long, default_value_t = LossWeights::default().w_measure)]
        w_measure: f64,
        #[arg(long, default_value_t = SolverConfig::default().max_iters)]
        max_iters: usize,
    },
    /// Sweep the fit over target body heights and report the 2D/3D
    /// divergence of the solutions.
    Ambiguity {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        template: Option<PathBuf>,
        /// Height range as start:end:count (count >= 2), meters.
        #[arg(long)]
        heights: String,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = LossWeights::default().w_2d)]
        w_2d: f64,
        #[arg(long, default_value_t = LossWeights::default().w_mimic_pose)]
        w_mimic_pose: f64,
        #[arg(long, default_value_t = LossWeights::default().w_mimic_shape)]
        w_mimic_shape: f64,
        #[arg(long, default_value_t = LossWeights::default().w_measure)]
        w_measure: f64,
        #[arg(long, default_value_t = SolverConfig::default().max_iters)]
        max_iters: usize,
    },
    /// Evaluate predicted against ground-truth sequences.
    Eval {
        /// Prediction: JointSeq JSON or root-only CSV.
        #[arg(long)]
        pred: PathBuf,
        /// Ground truth: JointSeq JSON or root-only CSV.
        #[arg(long)]
        gt: PathBuf,
        /// Write the metric report JSON here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Compute the local metrics (MPJPE, PA-MPJPE).
        #[arg(long)]
        local: bool,
        /// Compute the world metrics (WA/W-MPJPE100, RTE, ERVE).
        #[arg(long)]
        world: bool,
        /// Frame rate assumed for CSV inputs.
        #[arg(long, default_value_t = 30.0)]
        fps: f64,
    },
    /// Generate a synthetic trajectory dataset with exact ground truth.
    Synth {
        /// Trajectory spec JSON.
        #[arg(long)]
        spec: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
}

fn read_to_string(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Parse(format!("cannot parse {}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)
                .map_err(|e| CliError::Parse(format!("cannot create {}: {e}", dir.display())))?;
        }
    }
    std::fs::write(path, bytes)
        .map_err(|e| CliError::Parse(format!("cannot write {}: {e}", path.display())))
}

fn load_template(path: &Option<PathBuf>) -> Result<SkeletonTemplate, CliError> {
    match path {
        Some(p) => {
            let file = parse_json(p)?;
            SkeletonTemplate::from_file(file)
                .map_err(|e| CliError::Parse(format!("{}: {e}", p.display())))
        }
        None => SkeletonTemplate::default_template(DEFAULT_NUM_VERTICES)
            .map_err(|e| CliError::Numeric(e.to_string())),
    }
}

fn map_fit_error(e: FitError) -> CliError {
    match e {
        FitError::InvalidProblem(m) => CliError::Parse(m),
        other => CliError::Numeric(other.to_string()),
    }
}

fn map_metric_error(e: MetricError) -> CliError {
    match e {
        MetricError::DegenerateConfiguration(m) => CliError::Numeric(m),
        other => CliError::Parse(other.to_string()),
    }
}

/// Parse `start:end:count` into an inclusive linspace.
fn parse_heights(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(format!(
            "--heights expects start:end:count, got {spec:?}"
        )));
    }
    let a: f64 = parts[0]
        .parse()
        .map_err(|e| CliError::Usage(format!("bad start height: {e}")))?;
    let b: f64 = parts[1]
        .parse()
        .map_err(|e| CliError::Usage(format!("bad end height: {e}")))?;
    let n: usize = parts[2]
        .parse()
        .map_err(|e| CliError::Usage(format!("bad height count: {e}")))?;
    if n < 2 {
        return Err(CliError::Usage(format!(
            "need at least 2 heights, got {n}"
        )));
    }
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() && a != b) {
        return Err(CliError::Usage(format!(
            "height range must be positive and non-degenerate, got {a}:{b}"
        )));
    }
    Ok((0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect())
}

pub fn run(cli: &Cli) -> Result<CommandOutcome, CliError> {
    match &cli.command {
        Command::Raymap {
            camera,
            bbox,
            out,
            json,
            normalize,
        } => cmd_raymap(camera, bbox.as_deref(), out, json.as_deref(), *normalize),
        Command::Fit {
            problem,
            template,
            out,
            w_2d,
            w_mimic_pose,
            w_mimic_shape,
            w_measure,
            max_iters,
        } => {
            let w = LossWeights {
                w_2d: *w_2d,
                w_mimic_pose: *w_mimic_pose,
                w_mimic_shape: *w_mimic_shape,
                w_measure: *w_measure,
            };
            cmd_fit(problem, template, out, &w, *max_iters)
        }
        Command::Ambiguity {
            problem,
            template,
            heights,
            out_dir,
            w_2d,
            w_mimic_pose,
            w_mimic_shape,
            w_measure,
            max_iters,
        } => {
            let w = LossWeights {
                w_2d: *w_2d,
                w_mimic_pose: *w_mimic_pose,
                w_mimic_shape: *w_mimic_shape,
                w_measure: *w_measure,
            };
            cmd_ambiguity(problem, template, heights, out_dir, &w, *max_iters)
        }
        Command::Eval {
            pred,
            gt,
            report,
            local,
            world,
            fps,
        } => cmd_eval(pred, gt, report.as_deref(), *local, *world, *fps),
        Command::Synth { spec, out } => cmd_synth(spec, out, cli.seed),
    }
}

fn cmd_raymap(
    camera: &Path,
    bbox: Option<&Path>,
    out: &Path,
    json: Option<&Path>,
    normalize: bool,
) -> Result<CommandOutcome, CliError> {
    let cam: CameraFile = parse_json(camera)?;
    let k = cam
        .intrinsics()
        .map_err(|e| CliError::Parse(format!("{}: {e}", camera.display())))?;
    let size = cam
        .size()
        .map_err(|e| CliError::Parse(format!("{}: {e}", camera.display())))?;

    let full = ray_map(&k, size.width, size.height, normalize);
    let mut artifacts = Vec::new();
    let mut bin = Vec::new();
    full.write_binary(&mut bin)
        .map_err(|e| CliError::Parse(e.to_string()))?;
    write_file(out, &bin)?;
    artifacts.push(out.to_path_buf());
    if let Some(json_path) = json {
        let text = serde_json::to_string(&full.to_json())
            .map_err(|e| CliError::Parse(e.to_string()))?;
        write_file(json_path, text.as_bytes())?;
        artifacts.push(json_path.to_path_buf());
    }

    let mut summary = format!("ray map {}x{} written", size.width, size.height);
    if let Some(bbox_path) = bbox {
        let b: BBox = parse_json(bbox_path)?;
        BBox::new(b.u0, b.v0, b.side, b.scale)
            .map_err(|e| CliError::Parse(format!("{}: {e}", bbox_path.display())))?;
        let res = b.crop_resolution();
        let crop = ray_map(&crop_intrinsics(&k, &b), res, res, normalize);

        // Crop invariance against the full-camera unprojection.
        let mut max_dev: f64 = 0.0;
        for i in 0..res {
            for j in 0..res {
                let up = Pixel::new(j as f64 + 0.5, i as f64 + 0.5);
                let fullpx = Pixel::new(b.u0 + b.scale * up.u, b.v0 + b.scale * up.v);
                let want = unproject_ray(fullpx, &k, normalize).direction();
                let got = crop.at(i, j);
                max_dev = max_dev.max((want - got).norm() / want.norm());
            }
        }
        if max_dev >= 1e-9 {
            return Err(CliError::Numeric(format!(
                "crop invariance violated: max relative ray deviation {max_dev}"
            )));
        }

        let crop_path = out.with_extension("crop.bin");
        let mut crop_bin = Vec::new();
        crop.write_binary(&mut crop_bin)
            .map_err(|e| CliError::Parse(e.to_string()))?;
        write_file(&crop_path, &crop_bin)?;
        artifacts.push(crop_path);
        let _ = write!(
            summary,
            "; crop {res}x{res} written, max ray deviation {max_dev:.3e}"
        );
    }
    Ok(CommandOutcome { artifacts, summary })
}

fn cmd_fit(
    problem: &Path,
    template: &Option<PathBuf>,
    out: &Path,
    w: &LossWeights,
    max_iters: usize,
) -> Result<CommandOutcome, CliError> {
    let file: FitProblemFile = parse_json(problem)?;
    let tpl = load_template(template)?;
    let prob = file.into_problem(tpl).map_err(map_fit_error)?;
    let init = prob.reference.clone();
    let cfg = SolverConfig {
        max_iters,
        ..Default::default()
    };
    let result = fit(&prob, w, &init, &cfg).map_err(map_fit_error)?;
    let text =
        serde_json::to_string_pretty(&result).map_err(|e| CliError::Parse(e.to_string()))?;
    write_file(out, text.as_bytes())?;
    let summary = format!(
        "fit: converged={} iters={} mean2d={:.4}px depth={:.4}m",
        result.converged, result.iterations, result.mean_kp2d_error, result.params.theta_t[2]
    );
    Ok(CommandOutcome {
        artifacts: vec![out.to_path_buf()],
        summary,
    })
}

fn format_csv_row(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn cmd_ambiguity(
    problem: &Path,
    template: &Option<PathBuf>,
    heights_spec: &str,
    out_dir: &Path,
    w: &LossWeights,
    max_iters: usize,
) -> Result<CommandOutcome, CliError> {
    let heights = parse_heights(heights_spec)?;
    if !(w.w_measure > 0.0) {
        return Err(CliError::Usage(
            "the ambiguity sweep needs --w-measure > 0".into(),
        ));
    }
    let file: FitProblemFile = parse_json(problem)?;
    let tpl = load_template(template)?;
    let prob = file.into_problem(tpl).map_err(map_fit_error)?;
    let init = prob.reference.clone();
    let cfg = SolverConfig {
        max_iters,
        ..Default::default()
    };
    let sweep = height_sweep(&prob, &heights, w, &init, &cfg).map_err(map_fit_error)?;

    // Per-height results and the solution-vs-reference alignment error for
    // the chart.
    let ref_joints = prob.template.forward(&prob.reference).joints;
    let mut rows = Vec::new();
    let mut err2d = Vec::new();
    let mut pa_ref = Vec::new();
    for (h, f) in sweep.heights.iter().zip(&sweep.fits) {
        match f {
            Ok(res) => {
                rows.push([*h, res.mean_kp2d_error, res.params.theta_t[2]]);
                err2d.push(res.mean_kp2d_error);
                let joints = prob.template.forward(&res.params).joints;
                let pa = crate::metrics::pa_mpjpe(&joints, &ref_joints)
                    .map_err(map_metric_error)?;
                pa_ref.push(pa);
            }
            Err(e) => return Err(CliError::Numeric(format!("height {h}: {e}"))),
        }
    }

    let mut sweep_csv = String::from("height_m,mean_kp2d_px,depth_m\n");
    for r in &rows {
        sweep_csv.push_str(&format_csv_row(r));
        sweep_csv.push('\n');
    }
    let sweep_path = out_dir.join("sweep.csv");
    write_file(&sweep_path, sweep_csv.as_bytes())?;

    let mut matrix_csv = String::from("height_m,");
    matrix_csv.push_str(&format_csv_row(&sweep.heights));
    matrix_csv.push('\n');
    for (h, row) in sweep.heights.iter().zip(&sweep.pa_mpjpe_matrix) {
        matrix_csv.push_str(&h.to_string());
        matrix_csv.push(',');
        matrix_csv.push_str(&format_csv_row(row));
        matrix_csv.push('\n');
    }
    let matrix_path = out_dir.join("pairwise_pa_mpjpe.csv");
    write_file(&matrix_path, matrix_csv.as_bytes())?;

    let svg = crate::svg::sweep_scatter(&sweep.heights, &err2d, &pa_ref);
    let svg_path = out_dir.join("sweep.svg");
    write_file(&svg_path, svg.as_bytes())?;

    let summary = format!(
        "ambiguity sweep: {} heights, max pairwise PA-MPJPE {:.4} mm, max mean 2D {:.4} px",
        sweep.heights.len(),
        sweep.max_pairwise_pa_mpjpe,
        err2d.iter().cloned().fold(0.0, f64::max)
    );
    Ok(CommandOutcome {
        artifacts: vec![sweep_path, matrix_path, svg_path],
        summary,
    })
}

fn load_seq(path: &Path, fps: f64) -> Result<JointSeq, CliError> {
    if path.extension().and_then(|e| e.to_str()) == Some("csv") {
        let text = read_to_string(path)?;
        JointSeq::read_root_csv(&text, fps)
            .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
    } else {
        let file: JointSeqFile = parse_json(path)?;
        JointSeq::from_file(file).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
    }
}

fn cmd_eval(
    pred_path: &Path,
    gt_path: &Path,
    report_path: Option<&Path>,
    local: bool,
    world: bool,
    fps: f64,
) -> Result<CommandOutcome, CliError> {
    let pred = load_seq(pred_path, fps)?;
    let gt = load_seq(gt_path, fps)?;
    if pred.len() != gt.len() || pred.num_joints() != gt.num_joints() {
        return Err(CliError::Parse(format!(
            "sequence shape mismatch: {}x{} vs {}x{}",
            pred.len(),
            pred.num_joints(),
            gt.len(),
            gt.num_joints()
        )));
    }
    // Neither flag selects everything.
    let (local, world) = if !local && !world {
        (true, true)
    } else {
        (local, world)
    };

    let mut report = MetricReport::default();
    if local {
        report.mpjpe_mm = Some(seq_mpjpe(&pred, &gt).map_err(map_metric_error)?);
        report.pa_mpjpe_mm = Some(seq_pa_mpjpe(&pred, &gt).map_err(map_metric_error)?);
    }
    if world {
        report.wa_mpjpe_100_mm = Some(wa_mpjpe_100(&pred, &gt).map_err(map_metric_error)?);
        report.w_mpjpe_100_mm = Some(w_mpjpe_100(&pred, &gt).map_err(map_metric_error)?);
        let pr = pred.roots();
        let gr = gt.roots();
        report.rte_percent = Some(rte(&pr, &gr).map_err(map_metric_error)?);
        report.erve_mm_per_frame = Some(erve(&pr, &gr).map_err(map_metric_error)?);
    }

    let mut artifacts = Vec::new();
    if let Some(path) = report_path {
        let text =
            serde_json::to_string_pretty(&report).map_err(|e| CliError::Parse(e.to_string()))?;
        write_file(path, text.as_bytes())?;
        artifacts.push(path.to_path_buf());
    }
    let mut summary = String::from("eval:");
    for (tag, v) in [
        (" mpjpe", report.mpjpe_mm),
        (" pa", report.pa_mpjpe_mm),
        (" wa100", report.wa_mpjpe_100_mm),
        (" w100", report.w_mpjpe_100_mm),
        (" rte%", report.rte_percent),
        (" erve", report.erve_mm_per_frame),
    ] {
        if let Some(v) = v {
            let _ = write!(summary, "{tag}={v:.4}");
        }
    }
    println!("{}", report.table());
    Ok(CommandOutcome { artifacts, summary })
}

fn cmd_synth(
    spec_path: &Path,
    out_dir: &Path,
    seed_override: Option<u64>,
) -> Result<CommandOutcome, CliError> {
    let mut spec: TrajectorySpec = parse_json(spec_path)?;
    if let Some(seed) = seed_override {
        spec.seed = seed;
    }
    let tpl = SkeletonTemplate::default_template(DEFAULT_NUM_VERTICES)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    let (gt, samples) = make_trajectory(&spec, &tpl).map_err(|e| match e {
        SynthError::InvalidSpec(m) => CliError::Parse(m),
        other => CliError::Numeric(other.to_string()),
    })?;

    let mut jsonl = String::new();
    for s in &samples {
        let line =
            serde_json::to_string(&s.to_file()).map_err(|e| CliError::Parse(e.to_string()))?;
        jsonl.push_str(&line);
        jsonl.push('\n');
    }
    let dataset_path = out_dir.join("dataset.jsonl");
    write_file(&dataset_path, jsonl.as_bytes())?;

    let gt_text = serde_json::to_string(&gt.to_file()).map_err(|e| CliError::Parse(e.to_string()))?;
    let gt_path = out_dir.join("gt_world.json");
    write_file(&gt_path, gt_text.as_bytes())?;

    // A ready-to-fit problem for the first frame, with the ground truth as
    // mimic reference and its exact height as the measurement target.
    let first = &samples[0];
    let problem = FitProblemFile {
        keypoints: first.kp2d.clone(),
        camera: CameraFile {
            fx: first.intrinsics.fx,
            fy: first.intrinsics.fy,
            cx: first.intrinsics.cx,
            cy: first.intrinsics.cy,
            width: first.image.width,
            height: first.image.height,
        },
        reference: first.params.clone(),
        target_height: Some(tpl.height(&first.params.beta)),
    };
    let problem_text =
        serde_json::to_string_pretty(&problem).map_err(|e| CliError::Parse(e.to_string()))?;
    let problem_path = out_dir.join("problem_frame0.json");
    write_file(&problem_path, problem_text.as_bytes())?;

    let summary = format!(
        "synth: {} frames along {:?} path, {} joints, seed {}",
        samples.len(),
        spec.path,
        gt.num_joints(),
        spec.seed
    );
    Ok(CommandOutcome {
        artifacts: vec![dataset_path, gt_path, problem_path],
        summary,
    })
}

/// Round-trip check used by tests: every artifact a command writes parses
/// back through its owning schema.
pub fn reparse_artifact(path: &Path) -> Result<(), CliError> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    match (name, ext) {
        (_, "bin") => {
            let bytes = std::fs::read(path)
                .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
            RayMap::read_binary(bytes.as_slice())
                .map(|_| ())
                .map_err(|e| CliError::Parse(e.to_string()))
        }
        ("dataset.jsonl", _) => {
            let text = read_to_string(path)?;
            for line in text.lines() {
                let file: SceneSampleFile = serde_json::from_str(line)
                    .map_err(|e| CliError::Parse(e.to_string()))?;
                crate::synth::SceneSample::from_file(file)
                    .map_err(|e| CliError::Parse(e.to_string()))?;
            }
            Ok(())
        }
        ("gt_world.json", _) => {
            let file: JointSeqFile = parse_json(path)?;
            JointSeq::from_file(file)
                .map(|_| ())
                .map_err(|e| CliError::Parse(e.to_string()))
        }
        ("problem_frame0.json", _) => {
            let _: FitProblemFile = parse_json(path)?;
            Ok(())
        }
        (_, "csv") => {
            let _ = read_to_string(path)?;
            Ok(())
        }
        (_, "svg") => {
            let text = read_to_string(path)?;
            if text.starts_with("<?xml") && text.ends_with("</svg>\n") {
                Ok(())
            } else {
                Err(CliError::Parse("malformed svg".into()))
            }
        }
        (_, "json") => {
            // Result/report/ray-map JSON: must at least be valid JSON.
            let _: serde_json::Value = parse_json(path)?;
            Ok(())
        }
        _ => Ok(()),
    }
}

/// Test hook: a fit result file parses back into the typed schema.
pub fn reparse_fit_result(path: &Path) -> Result<FitResult, CliError> {
    parse_json(path)
}

/// Test hook: expose typed body-params parsing for golden files.
pub fn reparse_body_params(text: &str) -> Result<BodyParams, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
}
