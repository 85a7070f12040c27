//! Benchmark-conformant evaluation: difficulty bucketing, greedy matching at
//! a 3D IoU threshold, precision/recall curves, and interpolated average
//! precision, plus threshold sweeps.
//!
//! Matching follows the official benchmark shape: detections claim ground
//! truth in descending score order; ground truth outside the difficulty
//! bucket is ignored (absorbs matches without counting as TP or FN), and
//! detections landing on DontCare regions are dropped from the accounting.
//! Frames are processed independently and pooled before the curve is built,
//! so the per-frame work parallelizes without changing any result.

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::box_geometry::iou_3d;
use crate::kitti_io::{Detection, GroundTruthObject};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("IoU threshold {0} outside [0, 1]")]
    BadThreshold(f64),
}

/// Ground-truth difficulty buckets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Difficulty {
    Easy,
    Moderate,
    Hard,
}

impl Difficulty {
    pub const ALL: [Difficulty; 3] = [Difficulty::Easy, Difficulty::Moderate, Difficulty::Hard];

    pub fn name(self) -> &'static str {
        match self {
            Difficulty::Easy => "easy",
            Difficulty::Moderate => "moderate",
            Difficulty::Hard => "hard",
        }
    }
}

/// Thresholds a ground-truth object must satisfy to enter a bucket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DifficultyRule {
    pub min_bbox_height_px: f64,
    pub max_occlusion_code: i32,
    pub max_truncation: f64,
}

impl DifficultyRule {
    /// Benchmark defaults: Easy (40 px, fully visible, 15%),
    /// Moderate (25 px, partly occluded, 30%), Hard (25 px, hard to see, 50%).
    pub fn default_for(difficulty: Difficulty) -> Self {
        match difficulty {
            Difficulty::Easy => DifficultyRule {
                min_bbox_height_px: 40.0,
                max_occlusion_code: 0,
                max_truncation: 0.15,
            },
            Difficulty::Moderate => DifficultyRule {
                min_bbox_height_px: 25.0,
                max_occlusion_code: 1,
                max_truncation: 0.30,
            },
            Difficulty::Hard => DifficultyRule {
                min_bbox_height_px: 25.0,
                max_occlusion_code: 2,
                max_truncation: 0.50,
            },
        }
    }

    pub fn defaults() -> [DifficultyRule; 3] {
        Difficulty::ALL.map(DifficultyRule::default_for)
    }

    pub fn admits(&self, gt: &GroundTruthObject) -> bool {
        gt.box2d.height() >= self.min_bbox_height_px
            && gt.occlusion >= 0
            && gt.occlusion <= self.max_occlusion_code
            && gt.truncation <= self.max_truncation
    }
}

/// Which difficulty buckets an object belongs to. Objects in no bucket are
/// ignored by the evaluator (never TP-able, never a miss).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DifficultySet {
    flags: [bool; 3],
}

impl DifficultySet {
    pub fn contains(&self, difficulty: Difficulty) -> bool {
        self.flags[difficulty as usize]
    }

    pub fn is_empty(&self) -> bool {
        !self.flags.iter().any(|&f| f)
    }

    pub fn iter(&self) -> impl Iterator<Item = Difficulty> + '_ {
        Difficulty::ALL.into_iter().filter(|&d| self.contains(d))
    }
}

/// Buckets an object into every difficulty whose thresholds it satisfies.
pub fn assign_difficulty(gt: &GroundTruthObject, rules: &[DifficultyRule; 3]) -> DifficultySet {
    DifficultySet {
        flags: [0, 1, 2].map(|i| rules[i].admits(gt)),
    }
}

/// Interpolation grid for average precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InterpMode {
    /// 11 points at recall 0.0, 0.1, ..., 1.0.
    Interp11,
    /// 40 points at recall 1/40, 2/40, ..., 1.0.
    #[default]
    Interp40,
}

impl InterpMode {
    pub fn anchors(self) -> Vec<f64> {
        match self {
            InterpMode::Interp11 => (0..=10).map(|i| i as f64 / 10.0).collect(),
            InterpMode::Interp40 => (1..=40).map(|i| i as f64 / 40.0).collect(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            InterpMode::Interp11 => "11",
            InterpMode::Interp40 => "40",
        }
    }
}

/// Fixed-point interpolated AP over a pooled precision/recall curve: the
/// mean over recall anchors of the best precision at or beyond each anchor.
pub fn average_precision(curve: &[(f64, f64)], mode: InterpMode) -> f64 {
    let anchors = mode.anchors();
    let mut total = 0.0;
    for anchor in &anchors {
        let best = curve
            .iter()
            .filter(|(recall, _)| *recall >= anchor - 1e-12)
            .map(|(_, precision)| *precision)
            .fold(0.0, f64::max);
        total += best;
    }
    total / anchors.len() as f64
}

/// Per-detection outcome of frame matching, in detection input order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DetectionOutcome {
    TruePositive {
        gt_index: usize,
        iou: f64,
    },
    FalsePositive,
    /// Matched an out-of-bucket ground truth or a DontCare region; dropped
    /// from the accounting.
    Ignored,
}

/// Per-ground-truth outcome, in input order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GtOutcome {
    Matched {
        det_index: usize,
    },
    Missed,
    /// In no difficulty bucket: absorbs matches, never a miss.
    Ignored,
    DontCare,
}

/// Result of matching one frame at one difficulty.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameMatch {
    pub detections: Vec<DetectionOutcome>,
    pub ground_truth: Vec<GtOutcome>,
}

impl FrameMatch {
    pub fn true_positives(&self) -> usize {
        self.detections
            .iter()
            .filter(|o| matches!(o, DetectionOutcome::TruePositive { .. }))
            .count()
    }

    pub fn false_positives(&self) -> usize {
        self.detections
            .iter()
            .filter(|o| matches!(o, DetectionOutcome::FalsePositive))
            .count()
    }

    pub fn misses(&self) -> usize {
        self.ground_truth
            .iter()
            .filter(|o| matches!(o, GtOutcome::Missed))
            .count()
    }

    pub fn in_difficulty_gts(&self) -> usize {
        self.ground_truth
            .iter()
            .filter(|o| matches!(o, GtOutcome::Matched { .. } | GtOutcome::Missed))
            .count()
    }
}

/// Fraction of a detection's 2D box covered by a DontCare region above which
/// the detection is dropped from the accounting.
const DONT_CARE_OVERLAP: f64 = 0.5;

/// Greedy single-frame, single-class matching at one difficulty.
///
/// Detections are processed in descending score (ties keep input order) and
/// claim the unmatched in-bucket ground truth with the highest 3D IoU when
/// that IoU reaches the threshold. Failing that, they may be absorbed by an
/// out-of-bucket ground truth or a DontCare region; otherwise they are false
/// positives. Each ground truth is claimed at most once.
pub fn match_frame(
    detections: &[Detection],
    ground_truth: &[GroundTruthObject],
    rule: &DifficultyRule,
    iou_threshold: f64,
) -> FrameMatch {
    #[derive(Clone, Copy, PartialEq)]
    enum GtKind {
        Valid,
        Ignored,
        DontCare,
    }
    let kinds: Vec<GtKind> = ground_truth
        .iter()
        .map(|gt| {
            if gt.is_dont_care() {
                GtKind::DontCare
            } else if rule.admits(gt) && gt.dims.volume() > 0.0 && gt.location.z > 0.0 {
                // Degenerate boxes and behind-camera annotations are
                // tolerated by the parser but never evaluable.
                GtKind::Valid
            } else {
                GtKind::Ignored
            }
        })
        .collect();

    let mut order: Vec<usize> = (0..detections.len()).collect();
    order.sort_by(|&a, &b| detections[b].score.total_cmp(&detections[a].score));

    let mut det_outcomes = vec![DetectionOutcome::FalsePositive; detections.len()];
    let mut gt_claimed = vec![false; ground_truth.len()];
    let mut gt_outcomes: Vec<GtOutcome> = kinds
        .iter()
        .map(|k| match k {
            GtKind::Valid => GtOutcome::Missed,
            GtKind::Ignored => GtOutcome::Ignored,
            GtKind::DontCare => GtOutcome::DontCare,
        })
        .collect();

    for &det_index in &order {
        let det = &detections[det_index];
        let det_box = det.object.box3d();
        let best_of = |kind: GtKind, claimed: &[bool]| -> Option<(usize, f64)> {
            let mut best: Option<(usize, f64)> = None;
            for (gt_index, gt) in ground_truth.iter().enumerate() {
                if kinds[gt_index] != kind || claimed[gt_index] {
                    continue;
                }
                let overlap = iou_3d(&det_box, &gt.box3d());
                if best.is_none_or(|(_, b)| overlap > b) {
                    best = Some((gt_index, overlap));
                }
            }
            best
        };

        if let Some((gt_index, iou)) = best_of(GtKind::Valid, &gt_claimed) {
            if iou >= iou_threshold {
                gt_claimed[gt_index] = true;
                gt_outcomes[gt_index] = GtOutcome::Matched { det_index };
                det_outcomes[det_index] = DetectionOutcome::TruePositive { gt_index, iou };
                continue;
            }
        }
        if let Some((gt_index, iou)) = best_of(GtKind::Ignored, &gt_claimed) {
            if iou >= iou_threshold {
                gt_claimed[gt_index] = true;
                det_outcomes[det_index] = DetectionOutcome::Ignored;
                continue;
            }
        }
        let det_area = det.object.box2d.area();
        let on_dont_care = det_area > 0.0
            && ground_truth
                .iter()
                .zip(&kinds)
                .filter(|(_, &k)| k == GtKind::DontCare)
                .any(|(gt, _)| {
                    det.object.box2d.intersection_area(&gt.box2d) / det_area >= DONT_CARE_OVERLAP
                });
        if on_dont_care {
            det_outcomes[det_index] = DetectionOutcome::Ignored;
        }
    }

    FrameMatch {
        detections: det_outcomes,
        ground_truth: gt_outcomes,
    }
}

/// Evaluation settings; `class` selects which objects count, everything else
/// follows the benchmark defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalOptions {
    pub class: String,
    pub iou_threshold: f64,
    pub interp: InterpMode,
    pub rules: [DifficultyRule; 3],
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            class: "Car".to_string(),
            iou_threshold: 0.7,
            interp: InterpMode::default(),
            rules: DifficultyRule::defaults(),
        }
    }
}

/// Per-difficulty evaluation result.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub difficulty: Difficulty,
    pub iou_threshold: f64,
    pub interp: InterpMode,
    /// AP under the configured interpolation mode.
    pub ap: f64,
    pub ap11: f64,
    pub ap40: f64,
    /// Pooled (recall, precision) samples, one per counted detection,
    /// recall non-decreasing.
    pub curve: Vec<(f64, f64)>,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub ground_truth_count: usize,
}

/// Aggregated evaluation output plus non-fatal warnings (e.g. prediction
/// frames without matching ground truth, which are skipped).
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRun {
    pub reports: Vec<EvalReport>,
    pub warnings: Vec<String>,
}

impl EvalRun {
    pub fn report(&self, difficulty: Difficulty) -> &EvalReport {
        &self.reports[difficulty as usize]
    }
}

fn filter_class<'a>(objects: &'a [GroundTruthObject], class: &str) -> Vec<&'a GroundTruthObject> {
    objects
        .iter()
        .filter(|o| o.class_name == class || o.is_dont_care())
        .collect()
}

/// Evaluate pooled predictions against ground truth over aligned frame ids.
///
/// Frames present only in the predictions are reported as warnings and
/// skipped; ground-truth frames without predictions count their objects as
/// misses. The result is independent of frame processing order and, at
/// distinct scores, of detection input order.
pub fn evaluate(
    ground_truth: &BTreeMap<String, Vec<GroundTruthObject>>,
    predictions: &BTreeMap<String, Vec<Detection>>,
    options: &EvalOptions,
) -> Result<EvalRun, EvalError> {
    if !(0.0..=1.0).contains(&options.iou_threshold) {
        return Err(EvalError::BadThreshold(options.iou_threshold));
    }
    let warnings: Vec<String> = predictions
        .keys()
        .filter(|id| !ground_truth.contains_key(*id))
        .map(|id| format!("frame {id}: predictions without ground truth, skipped"))
        .collect();

    static EMPTY: Vec<Detection> = Vec::new();
    let frames: Vec<(&String, &Vec<GroundTruthObject>)> = ground_truth.iter().collect();
    // Per difficulty: scored detections in frame order, and the GT total.
    type FrameTallies = [(Vec<(f64, bool)>, usize); 3];
    let per_frame: Vec<FrameTallies> = frames
        .par_iter()
        .map(|(id, gts)| {
            let dets_all = predictions.get(*id).unwrap_or(&EMPTY);
            let gts: Vec<GroundTruthObject> = filter_class(gts, &options.class)
                .into_iter()
                .cloned()
                .collect();
            let dets: Vec<Detection> = dets_all
                .iter()
                .filter(|d| d.object.class_name == options.class)
                .cloned()
                .collect();
            [0, 1, 2].map(|d| {
                let matched = match_frame(&dets, &gts, &options.rules[d], options.iou_threshold);
                let scored: Vec<(f64, bool)> = matched
                    .detections
                    .iter()
                    .zip(&dets)
                    .filter_map(|(outcome, det)| match outcome {
                        DetectionOutcome::TruePositive { .. } => Some((det.score, true)),
                        DetectionOutcome::FalsePositive => Some((det.score, false)),
                        DetectionOutcome::Ignored => None,
                    })
                    .collect();
                (scored, matched.in_difficulty_gts())
            })
        })
        .collect();

    let reports = Difficulty::ALL
        .map(|difficulty| {
            let d = difficulty as usize;
            let mut pooled: Vec<(f64, bool)> = Vec::new();
            let mut gt_count = 0usize;
            for frame in &per_frame {
                pooled.extend_from_slice(&frame[d].0);
                gt_count += frame[d].1;
            }
            // Stable sort: equal scores keep (frame, input) order.
            pooled.sort_by(|a, b| b.0.total_cmp(&a.0));

            let mut curve = Vec::with_capacity(pooled.len());
            let (mut tp, mut fp) = (0usize, 0usize);
            for (_, hit) in &pooled {
                if *hit {
                    tp += 1;
                } else {
                    fp += 1;
                }
                if gt_count > 0 {
                    curve.push((tp as f64 / gt_count as f64, tp as f64 / (tp + fp) as f64));
                }
            }
            let ap11 = average_precision(&curve, InterpMode::Interp11);
            let ap40 = average_precision(&curve, InterpMode::Interp40);
            EvalReport {
                difficulty,
                iou_threshold: options.iou_threshold,
                interp: options.interp,
                ap: match options.interp {
                    InterpMode::Interp11 => ap11,
                    InterpMode::Interp40 => ap40,
                },
                ap11,
                ap40,
                curve,
                true_positives: tp,
                false_positives: fp,
                false_negatives: gt_count - tp,
                ground_truth_count: gt_count,
            }
        })
        .to_vec();

    Ok(EvalRun { reports, warnings })
}

/// AP per difficulty at each IoU threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCurve {
    pub difficulty: Difficulty,
    /// (threshold, AP) points in threshold order.
    pub points: Vec<(f64, f64)>,
}

/// The default sweep grid: 0.00 to 1.00 in steps of 0.01.
pub fn default_sweep_thresholds() -> Vec<f64> {
    (0..=100).map(|i| i as f64 / 100.0).collect()
}

/// Evaluate across a grid of IoU thresholds.
pub fn sweep_iou(
    ground_truth: &BTreeMap<String, Vec<GroundTruthObject>>,
    predictions: &BTreeMap<String, Vec<Detection>>,
    options: &EvalOptions,
    thresholds: &[f64],
) -> Result<Vec<SweepCurve>, EvalError> {
    let runs: Vec<EvalRun> = thresholds
        .par_iter()
        .map(|&iou_threshold| {
            evaluate(
                ground_truth,
                predictions,
                &EvalOptions {
                    iou_threshold,
                    ..options.clone()
                },
            )
        })
        .collect::<Result<_, _>>()?;
    Ok(Difficulty::ALL
        .map(|difficulty| SweepCurve {
            difficulty,
            points: thresholds
                .iter()
                .zip(&runs)
                .map(|(&t, run)| (t, run.report(difficulty).ap))
                .collect(),
        })
        .to_vec())
}
