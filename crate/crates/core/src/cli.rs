//! Implementations behind the `slk` binary's subcommands. The binary itself
//! only parses flags and dispatches here, so every command is callable (and
//! tested) as a library function.
//!
//! Commands never mutate their input directories; all artifacts go under the
//! configured output directory.

use std::fs;
use std::io::IsTerminal;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use crate::bin_codec::{BinKind, Dof, DofSchedules};
use crate::box_geometry::{render_bev_svg, Box3D};
use crate::evaluator::{
    default_sweep_thresholds, evaluate, sweep_iou, EvalOptions, EvalRun, InterpMode, SweepCurve,
};
use crate::kitti_io::{
    self, parse_calib_file, parse_label_file, parse_prediction_file, read_label_dir,
    read_prediction_dir,
};
use crate::synth::{
    depth_error_histogram, generate_dataset, predict_dataset, OracleNoise, PipelineArm, SceneConfig,
};
use crate::translation_solver::{solve_translation, TranslationSolution};

/// Shared settings for the evaluation-style commands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub labels: PathBuf,
    pub calib: Option<PathBuf>,
    pub preds: PathBuf,
    pub class: String,
    pub iou_threshold: f64,
    pub interp: InterpMode,
    pub bins: Option<PathBuf>,
    pub seed: u64,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            labels: PathBuf::new(),
            calib: None,
            preds: PathBuf::new(),
            class: "Car".to_string(),
            iou_threshold: 0.7,
            interp: InterpMode::default(),
            bins: None,
            seed: 0,
            threads: None,
            out: None,
        }
    }
}

impl RunConfig {
    /// Check paths and ranges before any work starts.
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.iou_threshold) {
            bail!("--iou {} outside [0, 1]", self.iou_threshold);
        }
        if !self.labels.is_dir() {
            bail!("label directory {} not found", self.labels.display());
        }
        if !self.preds.is_dir() {
            bail!("prediction directory {} not found", self.preds.display());
        }
        if let Some(calib) = &self.calib {
            if !calib.exists() {
                bail!("calibration path {} not found", calib.display());
            }
        }
        Ok(())
    }

    fn eval_options(&self) -> EvalOptions {
        EvalOptions {
            class: self.class.clone(),
            iou_threshold: self.iou_threshold,
            interp: self.interp,
            ..EvalOptions::default()
        }
    }
}

/// True when ANSI colors should be emitted: stdout is a terminal and
/// `SLK_NO_COLOR` is unset.
pub fn use_color() -> bool {
    std::env::var_os("SLK_NO_COLOR").is_none() && std::io::stdout().is_terminal()
}

fn bold(text: &str) -> String {
    if use_color() {
        format!("\x1b[1m{text}\x1b[0m")
    } else {
        text.to_string()
    }
}

/// Load a schedule config, or the defaults when no path is given.
pub fn load_schedules(path: Option<&Path>) -> Result<DofSchedules> {
    match path {
        None => Ok(DofSchedules::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .with_context(|| format!("reading schedule config {}", p.display()))?;
            DofSchedules::from_config_str(&text)
                .with_context(|| format!("parsing schedule config {}", p.display()))
        }
    }
}

/// Outcome of `slk validate`: per-line parse errors and softer findings.
#[derive(Debug, Default)]
pub struct ValidationReport {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
    pub files_checked: usize,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.errors.is_empty()
    }
}

fn list_txt_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "txt"))
        .collect();
    files.sort();
    Ok(files)
}

/// Parse every file in the given trees, collecting rather than aborting on
/// per-line errors. An empty prediction directory is a warning, not an error.
pub fn cmd_validate(
    labels: &Path,
    calib: Option<&Path>,
    preds: Option<&Path>,
) -> Result<ValidationReport> {
    let mut report = ValidationReport::default();

    for path in list_txt_files(labels)? {
        report.files_checked += 1;
        let text =
            fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        match parse_label_file(&text) {
            Ok(objects) => {
                for finding in kitti_io::validate_objects(&objects) {
                    report
                        .warnings
                        .push(format!("{}: {finding}", path.display()));
                }
            }
            Err(e) => report.errors.push(format!("{}: {e}", path.display())),
        }
    }

    if let Some(calib_dir) = calib {
        for path in list_txt_files(calib_dir)? {
            report.files_checked += 1;
            let text =
                fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            if let Err(e) = parse_calib_file(&text) {
                report.errors.push(format!("{}: {e}", path.display()));
            }
        }
    }

    if let Some(pred_dir) = preds {
        let files = list_txt_files(pred_dir)?;
        if files.is_empty() {
            report.warnings.push(format!(
                "{}: prediction directory is empty",
                pred_dir.display()
            ));
        }
        for path in files {
            report.files_checked += 1;
            let text =
                fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            match parse_prediction_file(&text) {
                Ok(dets) => {
                    for finding in kitti_io::validate_detections(&dets) {
                        report
                            .warnings
                            .push(format!("{}: {finding}", path.display()));
                    }
                }
                Err(e) => report.errors.push(format!("{}: {e}", path.display())),
            }
        }
    }
    Ok(report)
}

pub fn render_validation_report(report: &ValidationReport) -> String {
    let mut out = String::new();
    for e in &report.errors {
        out.push_str(&format!("error: {e}\n"));
    }
    for w in &report.warnings {
        out.push_str(&format!("warning: {w}\n"));
    }
    out.push_str(&format!(
        "{} files checked, {} errors, {} warnings\n",
        report.files_checked,
        report.errors.len(),
        report.warnings.len()
    ));
    out
}

/// Evaluate a prediction tree against a label tree. When an output directory
/// is configured, a machine-readable `result.txt` lands there.
pub fn cmd_eval(config: &RunConfig) -> Result<EvalRun> {
    config.validate()?;
    let ground_truth = read_label_dir(&config.labels)?;
    let predictions = read_prediction_dir(&config.preds)?;
    if let Some(calib) = &config.calib {
        // The matcher works in camera space already; parsing the calibration
        // tree validates that the dataset is complete and well-formed.
        if calib.is_dir() {
            kitti_io::read_calib_dir(calib)?;
        } else {
            let text = fs::read_to_string(calib)
                .with_context(|| format!("reading {}", calib.display()))?;
            parse_calib_file(&text).with_context(|| format!("parsing {}", calib.display()))?;
        }
    }
    let run = evaluate(&ground_truth, &predictions, &config.eval_options())?;
    if let Some(out) = &config.out {
        fs::create_dir_all(out)?;
        let path = out.join("result.txt");
        fs::write(&path, machine_report(&run))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(run)
}

/// One line per difficulty: name, AP11, AP40, TP, FP, FN.
pub fn machine_report(run: &EvalRun) -> String {
    run.reports
        .iter()
        .map(|r| {
            format!(
                "{} {:.6} {:.6} {} {} {}\n",
                r.difficulty.name(),
                r.ap11,
                r.ap40,
                r.true_positives,
                r.false_positives,
                r.false_negatives
            )
        })
        .collect()
}

pub fn render_eval_report(run: &EvalRun, config: &RunConfig) -> String {
    let mut out = String::new();
    out.push_str(&bold(&format!(
        "class {}  iou >= {:.2}  interp {}-point\n",
        config.class,
        config.iou_threshold,
        config.interp.label()
    )));
    out.push_str(&format!(
        "{:<12} {:>8} {:>8} {:>8} {:>8} {:>8}\n",
        "difficulty", "AP11", "AP40", "TP", "FP", "FN"
    ));
    for r in &run.reports {
        out.push_str(&format!(
            "{:<12} {:>8.4} {:>8.4} {:>8} {:>8} {:>8}\n",
            r.difficulty.name(),
            r.ap11,
            r.ap40,
            r.true_positives,
            r.false_positives,
            r.false_negatives
        ));
    }
    for w in &run.warnings {
        out.push_str(&format!("warning: {w}\n"));
    }
    out
}

/// Evaluate across the default 0.00..1.00 threshold grid and write one CSV
/// per difficulty.
pub fn cmd_sweep(config: &RunConfig) -> Result<Vec<SweepCurve>> {
    config.validate()?;
    let ground_truth = read_label_dir(&config.labels)?;
    let predictions = read_prediction_dir(&config.preds)?;
    let curves = sweep_iou(
        &ground_truth,
        &predictions,
        &config.eval_options(),
        &default_sweep_thresholds(),
    )?;
    if let Some(out) = &config.out {
        fs::create_dir_all(out)?;
        for curve in &curves {
            let path = out.join(format!("sweep_{}.csv", curve.difficulty.name()));
            fs::write(&path, sweep_csv(curve))
                .with_context(|| format!("writing {}", path.display()))?;
        }
    }
    Ok(curves)
}

pub fn sweep_csv(curve: &SweepCurve) -> String {
    let mut out = String::from("iou_threshold,ap\n");
    for (threshold, ap) in &curve.points {
        out.push_str(&format!("{threshold:.2},{ap:.6}\n"));
    }
    out
}

/// What `slk simulate` produced.
#[derive(Debug, Clone)]
pub struct SimulateSummary {
    pub frames: u64,
    pub objects: usize,
    pub label_dir: PathBuf,
    pub calib_dir: PathBuf,
    pub pred_dir: PathBuf,
    pub histogram_path: PathBuf,
}

/// Generate a synthetic dataset tree plus oracle predictions and the
/// depth-error histogram CSV. The tree is interchangeable with a real
/// dataset download: `label_2/`, `calib/`, and `preds/` per-frame files.
pub fn cmd_simulate(
    scene: &SceneConfig,
    noise: &OracleNoise,
    schedules: &DofSchedules,
    n_frames: u64,
    out: &Path,
) -> Result<SimulateSummary> {
    let dataset = generate_dataset(scene, n_frames);
    let arm = PipelineArm {
        schedules: schedules.clone(),
        ..PipelineArm::default()
    };
    let predictions = predict_dataset(&dataset, noise, &arm);

    let label_dir = out.join("label_2");
    let calib_dir = out.join("calib");
    let pred_dir = out.join("preds");
    kitti_io::write_label_dir(&label_dir, &dataset.frames)?;
    kitti_io::write_calib_dir(&calib_dir, &dataset.calib_frames())?;
    kitti_io::write_prediction_dir(&pred_dir, &predictions.frames)?;

    let histogram_path = out.join("depth_error_histogram.csv");
    let mut csv = String::from("lower,upper,count\n");
    for (lower, upper, count) in depth_error_histogram(&predictions.depth_errors, 5.0, 0.25) {
        csv.push_str(&format!("{lower:.2},{upper:.2},{count}\n"));
    }
    fs::write(&histogram_path, csv)
        .with_context(|| format!("writing {}", histogram_path.display()))?;

    Ok(SimulateSummary {
        frames: n_frames,
        objects: dataset.frames.values().map(Vec::len).sum(),
        label_dir,
        calib_dir,
        pred_dir,
        histogram_path,
    })
}

/// Solve for the translation of a label-format line using a calibration
/// file. The line's location field is ignored; dims, yaw, and the 2D box
/// drive the solver.
pub fn cmd_solve_translation(line: &str, calib_path: &Path) -> Result<TranslationSolution> {
    let objects = parse_label_file(line).context("parsing label line")?;
    let [object] = objects.as_slice() else {
        bail!("expected exactly one label line, found {}", objects.len());
    };
    let text = fs::read_to_string(calib_path)
        .with_context(|| format!("reading {}", calib_path.display()))?;
    let calib =
        parse_calib_file(&text).with_context(|| format!("parsing {}", calib_path.display()))?;
    Ok(solve_translation(
        &object.box2d,
        &object.dims,
        object.rotation_y,
        &calib.projection,
    )?)
}

pub fn render_translation(solution: &TranslationSolution) -> String {
    format!(
        "T = ({:.4}, {:.4}, {:.4}) m\nresidual = {:.6}\nreprojection error = {:.3} px\n\
         configuration = x_min:{} y_min:{} x_max:{} y_max:{}\n",
        solution.translation.x,
        solution.translation.y,
        solution.translation.z,
        solution.residual,
        solution.reprojection_error,
        solution.configuration.x_min_corner,
        solution.configuration.y_min_corner,
        solution.configuration.x_max_corner,
        solution.configuration.y_max_corner,
    )
}

/// Table of bin edges and centers for every DOF schedule.
pub fn cmd_bins(bins: Option<&Path>) -> Result<String> {
    let schedules = load_schedules(bins)?;
    let mut out = String::new();
    for dof in Dof::ALL {
        let s = schedules.get(dof);
        let kind = match s.kind {
            BinKind::Uniform => "uniform",
            BinKind::LinearGrowth => "linear-growth",
        };
        let (lo, hi) = s.span();
        out.push_str(&bold(&format!(
            "{}: {kind}, {} bins, range [{lo:.4}, {hi:.4})\n",
            dof.name(),
            s.count
        )));
        out.push_str(&format!(
            "  {:>4} {:>10} {:>10} {:>10}\n",
            "bin", "lower", "upper", "center"
        ));
        for i in 0..s.count {
            out.push_str(&format!(
                "  {:>4} {:>10.4} {:>10.4} {:>10.4}\n",
                i,
                s.edge(i),
                s.edge(i + 1),
                s.center(i)
            ));
        }
    }
    Ok(out)
}

/// Render one frame's bird's-eye view to `<out>/bev_<frame>.svg`.
pub fn cmd_bev(frame: &str, labels: &Path, preds: Option<&Path>, out: &Path) -> Result<PathBuf> {
    let label_path = labels.join(format!("{frame}.txt"));
    if !label_path.exists() {
        bail!("frame {frame}: {} not found", label_path.display());
    }
    let text = fs::read_to_string(&label_path)
        .with_context(|| format!("reading {}", label_path.display()))?;
    let objects =
        parse_label_file(&text).with_context(|| format!("parsing {}", label_path.display()))?;
    let gt_boxes: Vec<Box3D> = objects
        .iter()
        .filter(|o| !o.is_dont_care())
        .map(|o| o.box3d())
        .collect();

    let pred_boxes: Vec<Box3D> = match preds {
        None => Vec::new(),
        Some(pred_dir) => {
            let path = pred_dir.join(format!("{frame}.txt"));
            let text =
                fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            parse_prediction_file(&text)
                .with_context(|| format!("parsing {}", path.display()))?
                .iter()
                .map(|d| d.object.box3d())
                .collect()
        }
    };

    let svg = render_bev_svg(&gt_boxes, &pred_boxes);
    fs::create_dir_all(out)?;
    let path = out.join(format!("bev_{frame}.svg"));
    fs::write(&path, svg).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluator::Difficulty;
    use std::collections::BTreeMap;

    fn temp_dir(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("slk-cli-{tag}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        fs::create_dir_all(&dir).unwrap();
        dir
    }

    fn simulate_small(root: &Path, seed: u64, frames: u64) -> SimulateSummary {
        let scene = SceneConfig {
            seed,
            ..SceneConfig::default()
        };
        cmd_simulate(
            &scene,
            &OracleNoise::moderate(),
            &DofSchedules::default(),
            frames,
            root,
        )
        .unwrap()
    }

    #[test]
    fn simulate_then_eval_round_trip() {
        let root = temp_dir("sim-eval");
        let summary = simulate_small(&root, 5, 12);
        assert_eq!(summary.frames, 12);
        assert!(summary.objects > 0);
        assert!(summary.histogram_path.exists());

        let config = RunConfig {
            labels: summary.label_dir.clone(),
            calib: Some(summary.calib_dir.clone()),
            preds: summary.pred_dir.clone(),
            out: Some(root.join("eval")),
            ..RunConfig::default()
        };
        let run = cmd_eval(&config).unwrap();
        assert!(run.warnings.is_empty());
        let result = fs::read_to_string(root.join("eval/result.txt")).unwrap();
        assert_eq!(result.lines().count(), 3);
        assert!(result.starts_with("easy "));
        fs::remove_dir_all(&root).unwrap();
    }

    #[test]
    fn eval_with_gt_as_predictions_is_perfect() {
        let root = temp_dir("gt-preds");
        let scene = SceneConfig {
            seed: 9,
            ..SceneConfig::default()
        };
        let dataset = generate_dataset(&scene, 8);
        kitti_io::write_label_dir(&root.join("label_2"), &dataset.frames).unwrap();
        // Predictions = ground truth with unit score.
        let preds: BTreeMap<String, Vec<crate::kitti_io::Detection>> = dataset
            .frames
            .iter()
            .map(|(id, objects)| {
                (
                    id.clone(),
                    objects
                        .iter()
                        .map(|o| crate::kitti_io::Detection {
                            object: o.clone(),
                            score: 1.0,
                        })
                        .collect(),
                )
            })
            .collect();
        kitti_io::write_prediction_dir(&root.join("preds"), &preds).unwrap();
        let config = RunConfig {
            labels: root.join("label_2"),
            preds: root.join("preds"),
            ..RunConfig::default()
        };
        let run = cmd_eval(&config).unwrap();
        for report in &run.reports {
            assert_eq!(report.ap, 1.0, "{:?}", report.difficulty);
        }
        fs::remove_dir_all(&root).unwrap();
    }

    #[test]
    fn eval_missing_calib_is_a_structured_error() {
        let root = temp_dir("missing-calib");
        let summary = simulate_small(&root, 6, 4);
        let config = RunConfig {
            labels: summary.label_dir,
            calib: Some(root.join("nonexistent-calib")),
            preds: summary.pred_dir,
            ..RunConfig::default()
        };
        let err = cmd_eval(&config).unwrap_err();
        assert!(err.to_string().contains("not found"));
        fs::remove_dir_all(&root).unwrap();
    }

    #[test]
    fn validate_reports_line_errors_and_empty_pred_dir() {
        let root = temp_dir("validate");
        let labels = root.join("label_2");
        fs::create_dir_all(&labels).unwrap();
        fs::write(labels.join("000000.txt"), "Car 0.0 0 0.0 1 2 3\n").unwrap();
        let preds = root.join("preds");
        fs::create_dir_all(&preds).unwrap();

        let report = cmd_validate(&labels, None, Some(&preds)).unwrap();
        assert!(!report.is_clean());
        assert_eq!(report.errors.len(), 1);
        assert!(report.errors[0].contains("expected 15 fields"));
        assert!(report.warnings.iter().any(|w| w.contains("empty")));

        let rendered = render_validation_report(&report);
        assert!(rendered.contains("1 errors"));
        fs::remove_dir_all(&root).unwrap();
    }

    #[test]
    fn validate_accepts_a_clean_tree() {
        let root = temp_dir("validate-clean");
        let summary = simulate_small(&root, 7, 6);
        let report = cmd_validate(
            &summary.label_dir,
            Some(&summary.calib_dir),
            Some(&summary.pred_dir),
        )
        .unwrap();
        assert!(report.is_clean(), "errors: {:?}", report.errors);
        fs::remove_dir_all(&root).unwrap();
    }

    #[test]
    fn sweep_writes_monotone_csvs() {
        let root = temp_dir("sweep");
        let summary = simulate_small(&root, 8, 10);
        let config = RunConfig {
            labels: summary.label_dir,
            preds: summary.pred_dir,
            out: Some(root.join("sweep")),
            ..RunConfig::default()
        };
        let curves = cmd_sweep(&config).unwrap();
        assert_eq!(curves.len(), 3);
        for curve in &curves {
            for pair in curve.points.windows(2) {
                assert!(pair[1].1 <= pair[0].1 + 1e-12);
            }
            assert!(root
                .join(format!("sweep/sweep_{}.csv", curve.difficulty.name()))
                .exists());
        }
        fs::remove_dir_all(&root).unwrap();
    }

    #[test]
    fn solve_translation_command_recovers_a_synthetic_case() {
        use crate::box_geometry::Dimensions;
        use crate::camera::{CameraIntrinsics, CameraPoint};

        let root = temp_dir("solve");
        let k = CameraIntrinsics::new(721.5377, 721.5377, 609.5593, 172.854).unwrap();
        fs::write(
            root.join("calib.txt"),
            kitti_io::serialize_calib(&kitti_io::CalibrationFile {
                projection: k.clone(),
            }),
        )
        .unwrap();
        let location = CameraPoint::new(2.0, 1.5, 20.0);
        let dims = Dimensions::new(1.5, 1.7, 4.2);
        let hull = {
            let b = Box3D::new(dims, location, 0.3);
            let mut hull: Option<crate::box_geometry::BBox2D> = None;
            for c in crate::box_geometry::corners(&b) {
                let p = crate::camera::project(c, &k).unwrap();
                hull = Some(match hull {
                    None => crate::box_geometry::BBox2D::new(p.u, p.v, p.u, p.v),
                    Some(h) => crate::box_geometry::BBox2D::new(
                        h.left.min(p.u),
                        h.top.min(p.v),
                        h.right.max(p.u),
                        h.bottom.max(p.v),
                    ),
                });
            }
            hull.unwrap()
        };
        let line = format!(
            "Car 0.00 0 0.00 {:.6} {:.6} {:.6} {:.6} {:.6} {:.6} {:.6} 0 0 0 {:.6}",
            hull.left, hull.top, hull.right, hull.bottom, dims.height, dims.width, dims.length, 0.3,
        );
        let solution = cmd_solve_translation(&line, &root.join("calib.txt")).unwrap();
        // 2-decimal box coordinates limit recovery to centimeter scale.
        assert!((solution.translation.z - 20.0).abs() < 0.2);
        let rendered = render_translation(&solution);
        assert!(rendered.contains("T = ("));
        fs::remove_dir_all(&root).unwrap();
    }

    #[test]
    fn bins_table_prints_schedule_rows() {
        let table = cmd_bins(None).unwrap();
        assert!(table.contains("length: uniform, 10 bins"));
        assert!(table.contains("3.0000     3.2000     3.1000"));
        // Depth rows 1-3 carry the linear-growth edges.
        assert!(table.contains("0.0000     0.0200"));
        assert!(table.contains("0.0200     0.0600"));
        assert!(table.contains("0.0600     0.1200"));
        let custom = DofSchedules::from_config_str("length uniform 3.0 4 0.5\n").unwrap();
        assert_eq!(custom.length.count, 4);
    }

    #[test]
    fn bev_renders_gt_and_predictions() {
        let root = temp_dir("bev");
        let summary = simulate_small(&root, 10, 3);
        let path = cmd_bev(
            "000001",
            &summary.label_dir,
            Some(&summary.pred_dir),
            &root.join("render"),
        )
        .unwrap();
        let svg = fs::read_to_string(&path).unwrap();
        assert!(svg.contains("class=\"gt\""));
        assert!(svg.contains("class=\"pred\""));
        let missing = cmd_bev("999999", &summary.label_dir, None, &root.join("render"));
        assert!(missing.is_err());
        fs::remove_dir_all(&root).unwrap();
    }

    #[test]
    fn simulated_predictions_beat_nothing_and_lose_to_truth() {
        // Sanity: oracle AP at moderate noise sits strictly between 0 and 1
        // on a reasonably sized set.
        let root = temp_dir("sanity");
        let summary = simulate_small(&root, 11, 40);
        let config = RunConfig {
            labels: summary.label_dir,
            preds: summary.pred_dir,
            ..RunConfig::default()
        };
        let run = cmd_eval(&config).unwrap();
        let hard = run.report(Difficulty::Hard);
        assert!(hard.ap > 0.0 && hard.ap < 1.0, "ap {}", hard.ap);
        fs::remove_dir_all(&root).unwrap();
    }
}
