//! Discretization of box degrees of freedom into bins, one-hot encoding of
//! ground-truth values, and weighted-sum decoding of score vectors back to
//! continuous values.
//!
//! A schedule is either `Uniform` (constant bin width) or `LinearGrowth`
//! (bin i has width `step * (i + 1)`, so lower edges follow
//! `lower + step * i * (i + 1) / 2`). Values outside the covered range clamp
//! to the edge bins instead of erroring. Decoding is the score-weighted sum
//! of bin values, where a bin's value is its absolute center (a lower-edge
//! variant exists for ablations).

use std::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CodecError {
    #[error("score vector has {got} entries, schedule has {expected} bins")]
    LengthMismatch { expected: usize, got: usize },
    #[error("score vector has no mass")]
    ZeroMass,
    #[error("schedule needs count >= 1 and step > 0 (count {count}, step {step})")]
    BadSchedule { count: usize, step: f64 },
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
}

/// How bin widths evolve across the schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinKind {
    Uniform,
    LinearGrowth,
}

/// Which representative value a bin contributes to the weighted sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BinValue {
    #[default]
    Center,
    LowerEdge,
}

/// A discretization of one degree of freedom.
#[derive(Debug, Clone, PartialEq)]
pub struct BinSchedule {
    pub kind: BinKind,
    pub lower_bound: f64,
    pub count: usize,
    pub step: f64,
}

impl BinSchedule {
    pub fn uniform(lower_bound: f64, count: usize, step: f64) -> Result<Self, CodecError> {
        Self::new(BinKind::Uniform, lower_bound, count, step)
    }

    pub fn linear_growth(lower_bound: f64, count: usize, step: f64) -> Result<Self, CodecError> {
        Self::new(BinKind::LinearGrowth, lower_bound, count, step)
    }

    pub fn new(
        kind: BinKind,
        lower_bound: f64,
        count: usize,
        step: f64,
    ) -> Result<Self, CodecError> {
        if count < 1 || step.is_nan() || step <= 0.0 {
            return Err(CodecError::BadSchedule { count, step });
        }
        Ok(Self {
            kind,
            lower_bound,
            count,
            step,
        })
    }

    /// Lower edge of bin `i`; `edge(count)` is the exclusive upper bound of
    /// the covered range.
    pub fn edge(&self, i: usize) -> f64 {
        match self.kind {
            BinKind::Uniform => self.lower_bound + self.step * i as f64,
            BinKind::LinearGrowth => {
                self.lower_bound + self.step * (i as f64 * (i as f64 + 1.0)) / 2.0
            }
        }
    }

    pub fn width(&self, i: usize) -> f64 {
        self.edge(i + 1) - self.edge(i)
    }

    pub fn center(&self, i: usize) -> f64 {
        (self.edge(i) + self.edge(i + 1)) / 2.0
    }

    pub fn bin_value(&self, i: usize, mode: BinValue) -> f64 {
        match mode {
            BinValue::Center => self.center(i),
            BinValue::LowerEdge => self.edge(i),
        }
    }

    /// Covered range as `[lower, upper)`.
    pub fn span(&self) -> (f64, f64) {
        (self.edge(0), self.edge(self.count))
    }

    /// Index of the half-open bin containing `value`; out-of-range values
    /// clamp to the first or last bin.
    pub fn bin_index(&self, value: f64) -> usize {
        if value.is_nan() || value < self.edge(1) {
            return 0;
        }
        if value >= self.edge(self.count - 1) {
            return self.count - 1;
        }
        match self.kind {
            BinKind::Uniform => {
                let mut i = ((value - self.lower_bound) / self.step) as usize;
                i = i.min(self.count - 1);
                // Edge-based half-open semantics win over the division.
                while i > 0 && value < self.edge(i) {
                    i -= 1;
                }
                while i + 1 < self.count && value >= self.edge(i + 1) {
                    i += 1;
                }
                i
            }
            BinKind::LinearGrowth => {
                // Largest i with edge(i) <= value.
                let (mut lo, mut hi) = (1usize, self.count - 1);
                while lo < hi {
                    let mid = (lo + hi).div_ceil(2);
                    if self.edge(mid) <= value {
                        lo = mid;
                    } else {
                        hi = mid - 1;
                    }
                }
                lo
            }
        }
    }

    /// Classification target: all mass on the bin containing `value`.
    pub fn encode_one_hot(&self, value: f64) -> ScoreVector {
        ScoreVector::one_hot(self.count, self.bin_index(value))
    }

    /// Neighbor-smoothed classification target: mass decays as
    /// `smoothing^distance` around the containing bin, normalized.
    /// Zero smoothing is strict one-hot, the default target form.
    pub fn encode_smoothed(&self, value: f64, smoothing: f64) -> ScoreVector {
        ScoreVector::smoothed(self.count, self.bin_index(value), smoothing)
    }

    /// Weighted sum of bin centers. Scores are normalized to unit mass first.
    pub fn decode(&self, scores: &ScoreVector) -> Result<f64, CodecError> {
        self.decode_with(scores, BinValue::Center)
    }

    /// Weighted sum using the chosen bin value (center or lower edge).
    pub fn decode_with(&self, scores: &ScoreVector, mode: BinValue) -> Result<f64, CodecError> {
        let weights = self.normalized_weights(scores)?;
        Ok(weights
            .enumerate()
            .map(|(i, w)| w * self.bin_value(i, mode))
            .sum())
    }

    /// Wrap-around-safe decoder for angular schedules: the weighted sum of
    /// unit vectors at the bin centers, collapsed back to an angle.
    pub fn decode_angle_circular(&self, scores: &ScoreVector) -> Result<f64, CodecError> {
        let weights = self.normalized_weights(scores)?;
        let (mut sin_sum, mut cos_sum) = (0.0, 0.0);
        for (i, w) in weights.enumerate() {
            let (s, c) = self.center(i).sin_cos();
            sin_sum += w * s;
            cos_sum += w * c;
        }
        Ok(crate::camera::wrap_to_pi(sin_sum.atan2(cos_sum)))
    }

    /// Largest decode error attributable to quantization alone: half the
    /// widest bin.
    pub fn quantization_error_bound(&self) -> f64 {
        match self.kind {
            BinKind::Uniform => self.step / 2.0,
            BinKind::LinearGrowth => self.step * self.count as f64 / 2.0,
        }
    }

    fn normalized_weights<'a>(
        &self,
        scores: &'a ScoreVector,
    ) -> Result<impl Iterator<Item = f64> + 'a, CodecError> {
        if scores.len() != self.count {
            return Err(CodecError::LengthMismatch {
                expected: self.count,
                got: scores.len(),
            });
        }
        let total: f64 = scores.scores.iter().sum();
        if total.is_nan() || total <= 0.0 {
            return Err(CodecError::ZeroMass);
        }
        Ok(scores.scores.iter().map(move |s| s / total))
    }
}

/// Nonnegative per-bin scores, as a classification head would emit.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    pub scores: Vec<f64>,
}

impl ScoreVector {
    pub fn new(scores: Vec<f64>) -> Self {
        Self { scores }
    }

    pub fn one_hot(count: usize, index: usize) -> Self {
        let mut scores = vec![0.0; count];
        scores[index.min(count - 1)] = 1.0;
        Self { scores }
    }

    /// Unit-mass profile decaying as `decay^distance` from `center`;
    /// `decay <= 0` degenerates to one-hot.
    pub fn smoothed(count: usize, center: usize, decay: f64) -> Self {
        if decay <= 0.0 {
            return Self::one_hot(count, center);
        }
        let center = center.min(count - 1);
        let mut scores = Self::new(
            (0..count)
                .map(|i| decay.powi((i as i64 - center as i64).unsigned_abs() as i32))
                .collect(),
        );
        scores.normalize();
        scores
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Scale to unit mass. No-op on zero-mass vectors.
    pub fn normalize(&mut self) {
        let total: f64 = self.scores.iter().sum();
        if total > 0.0 {
            for s in &mut self.scores {
                *s /= total;
            }
        }
    }

    /// Index of the largest score.
    pub fn argmax(&self) -> usize {
        self.scores
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }
}

/// One row of the schedule registry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dof {
    Height,
    Width,
    Length,
    Depth,
    OffsetX,
    OffsetY,
    Angle,
}

impl Dof {
    pub const ALL: [Dof; 7] = [
        Dof::Height,
        Dof::Width,
        Dof::Length,
        Dof::Depth,
        Dof::OffsetX,
        Dof::OffsetY,
        Dof::Angle,
    ];

    /// Key used in schedule config files.
    pub fn name(self) -> &'static str {
        match self {
            Dof::Height => "height",
            Dof::Width => "width",
            Dof::Length => "length",
            Dof::Depth => "depth",
            Dof::OffsetX => "dx",
            Dof::OffsetY => "dy",
            Dof::Angle => "angle",
        }
    }

    fn from_name(name: &str) -> Option<Dof> {
        Dof::ALL.into_iter().find(|d| d.name() == name)
    }
}

/// The per-DOF schedule registry.
#[derive(Debug, Clone, PartialEq)]
pub struct DofSchedules {
    pub height: BinSchedule,
    pub width: BinSchedule,
    pub length: BinSchedule,
    pub depth: BinSchedule,
    pub dx: BinSchedule,
    pub dy: BinSchedule,
    pub angle: BinSchedule,
}

impl Default for DofSchedules {
    fn default() -> Self {
        Self {
            height: BinSchedule::uniform(1.2, 8, 0.1).unwrap(),
            width: BinSchedule::uniform(1.2, 8, 0.1).unwrap(),
            length: BinSchedule::uniform(3.0, 10, 0.2).unwrap(),
            depth: BinSchedule::linear_growth(0.0, 100, 0.02).unwrap(),
            dx: BinSchedule::uniform(-1.0, 40, 0.05).unwrap(),
            dy: BinSchedule::uniform(-0.5, 20, 0.05).unwrap(),
            angle: BinSchedule::uniform(-PI, 36, PI / 18.0).unwrap(),
        }
    }
}

impl DofSchedules {
    pub fn get(&self, dof: Dof) -> &BinSchedule {
        match dof {
            Dof::Height => &self.height,
            Dof::Width => &self.width,
            Dof::Length => &self.length,
            Dof::Depth => &self.depth,
            Dof::OffsetX => &self.dx,
            Dof::OffsetY => &self.dy,
            Dof::Angle => &self.angle,
        }
    }

    pub fn get_mut(&mut self, dof: Dof) -> &mut BinSchedule {
        match dof {
            Dof::Height => &mut self.height,
            Dof::Width => &mut self.width,
            Dof::Length => &mut self.length,
            Dof::Depth => &mut self.depth,
            Dof::OffsetX => &mut self.dx,
            Dof::OffsetY => &mut self.dy,
            Dof::Angle => &mut self.angle,
        }
    }

    /// Plain-text form: one `name kind lower count step` line per DOF.
    /// Floats are printed so they parse back bit-identically.
    pub fn to_config_string(&self) -> String {
        let mut out = String::from("# dof kind lower count step\n");
        for dof in Dof::ALL {
            let s = self.get(dof);
            let kind = match s.kind {
                BinKind::Uniform => "uniform",
                BinKind::LinearGrowth => "linear-growth",
            };
            out.push_str(&format!(
                "{} {} {:?} {} {:?}\n",
                dof.name(),
                kind,
                s.lower_bound,
                s.count,
                s.step
            ));
        }
        out
    }

    /// Parse the config format written by [`Self::to_config_string`].
    /// Missing DOFs keep their defaults; `#` starts a comment.
    pub fn from_config_str(text: &str) -> Result<Self, CodecError> {
        let mut schedules = DofSchedules::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            if fields.len() != 5 {
                return Err(CodecError::Config {
                    line,
                    message: format!("expected 5 fields, found {}", fields.len()),
                });
            }
            let dof = Dof::from_name(fields[0]).ok_or_else(|| CodecError::Config {
                line,
                message: format!("unknown dof {:?}", fields[0]),
            })?;
            let kind = match fields[1] {
                "uniform" => BinKind::Uniform,
                "linear-growth" => BinKind::LinearGrowth,
                other => {
                    return Err(CodecError::Config {
                        line,
                        message: format!("unknown kind {other:?}"),
                    })
                }
            };
            let parse_f64 = |s: &str| {
                s.parse::<f64>().map_err(|_| CodecError::Config {
                    line,
                    message: format!("invalid number {s:?}"),
                })
            };
            let lower = parse_f64(fields[2])?;
            let count = fields[3].parse::<usize>().map_err(|_| CodecError::Config {
                line,
                message: format!("invalid count {:?}", fields[3]),
            })?;
            let step = parse_f64(fields[4])?;
            *schedules.get_mut(dof) =
                BinSchedule::new(kind, lower, count, step).map_err(|e| CodecError::Config {
                    line,
                    message: e.to_string(),
                })?;
        }
        Ok(schedules)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent oracle: linear scan over the edge sequence.
    fn bin_index_by_scan(s: &BinSchedule, value: f64) -> usize {
        if value < s.edge(0) {
            return 0;
        }
        for i in 0..s.count {
            if value >= s.edge(i) && value < s.edge(i + 1) {
                return i;
            }
        }
        s.count - 1
    }

    #[test]
    fn height_first_bin() {
        let s = DofSchedules::default().height;
        assert_eq!(s.bin_index(1.24), 0);
        assert_eq!(s.edge(0), 1.2);
        assert!((s.edge(1) - 1.3).abs() < 1e-12);
        assert!((s.center(0) - 1.25).abs() < 1e-12);
    }

    #[test]
    fn depth_edge_sequence() {
        let s = DofSchedules::default().depth;
        assert_eq!(s.edge(0), 0.0);
        assert!((s.edge(1) - 0.02).abs() < 1e-12);
        assert!((s.edge(2) - 0.06).abs() < 1e-12);
        assert!((s.edge(3) - 0.12).abs() < 1e-12);
        assert_eq!(s.bin_index(0.07), 2);
        // Total coverage ends at 101, not 99.
        assert!((s.span().1 - 101.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_values_clamp() {
        let length = DofSchedules::default().length;
        assert_eq!(length.bin_index(9.9), 9);
        assert_eq!(length.bin_index(-4.0), 0);
        assert_eq!(length.bin_index(5.0), 9); // at the upper edge
    }

    #[test]
    fn one_hot_targets() {
        let s = DofSchedules::default();
        let h = s.height.encode_one_hot(1.25);
        assert_eq!(h.scores[0], 1.0);
        assert_eq!(h.scores.iter().sum::<f64>(), 1.0);
        let a = s.angle.encode_one_hot(-PI);
        assert_eq!(a.scores[0], 1.0);
        // LinearGrowth bin located by brute-force edge scan.
        let want = bin_index_by_scan(&s.depth, 50.0);
        assert_eq!(s.depth.encode_one_hot(50.0).argmax(), want);
        assert_eq!(want, 70);
    }

    #[test]
    fn smoothed_targets_stay_centered() {
        let s = DofSchedules::default().length;
        let strict = s.encode_smoothed(4.11, 0.0);
        assert_eq!(strict, s.encode_one_hot(4.11));
        let soft = s.encode_smoothed(4.11, 0.3);
        assert_eq!(soft.argmax(), s.bin_index(4.11));
        assert!((soft.scores.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // Smoothing pulls the decoded value by less than a bin width.
        let decoded = s.decode(&soft).unwrap();
        assert!((decoded - s.center(s.bin_index(4.11))).abs() < s.step);
    }

    #[test]
    fn decode_one_hot_returns_centers() {
        let s = DofSchedules::default();
        let v = s.height.decode(&ScoreVector::one_hot(8, 0)).unwrap();
        assert!((v - 1.25).abs() < 1e-12);
        let d = s.depth.decode(&ScoreVector::one_hot(100, 2)).unwrap();
        assert!((d - 0.09).abs() < 1e-12);
    }

    #[test]
    fn decode_uniform_scores_gives_range_midpoint() {
        let s = DofSchedules::default().length;
        let v = s.decode(&ScoreVector::new(vec![0.1; 10])).unwrap();
        assert!((v - 4.0).abs() < 1e-12);
    }

    #[test]
    fn decode_normalizes_unnormalized_input() {
        let s = DofSchedules::default().length;
        let v = s.decode(&ScoreVector::new(vec![2.0; 10])).unwrap();
        assert!((v - 4.0).abs() < 1e-12);
    }

    #[test]
    fn decode_rejects_bad_input() {
        let s = DofSchedules::default().length;
        assert_eq!(
            s.decode(&ScoreVector::new(vec![1.0; 3])),
            Err(CodecError::LengthMismatch {
                expected: 10,
                got: 3
            })
        );
        assert_eq!(
            s.decode(&ScoreVector::new(vec![0.0; 10])),
            Err(CodecError::ZeroMass)
        );
    }

    #[test]
    fn lower_edge_decode_shifts_down_half_width() {
        let s = DofSchedules::default().height;
        let one_hot = ScoreVector::one_hot(8, 3);
        let center = s.decode_with(&one_hot, BinValue::Center).unwrap();
        let edge = s.decode_with(&one_hot, BinValue::LowerEdge).unwrap();
        assert!((center - edge - 0.05).abs() < 1e-12);
    }

    #[test]
    fn circular_decode_one_hot_matches_center() {
        let s = DofSchedules::default().angle;
        for i in [0, 7, 18, 35] {
            let got = s
                .decode_angle_circular(&ScoreVector::one_hot(36, i))
                .unwrap();
            let want = crate::camera::wrap_to_pi(s.center(i));
            assert!((got - want).abs() < 1e-9);
        }
    }

    #[test]
    fn circular_decode_handles_wraparound_mass() {
        let s = DofSchedules::default().angle;
        // Bins centered at -175 and +175 degrees.
        let lo = s.bin_index(-175.0f64.to_radians());
        let hi = s.bin_index(175.0f64.to_radians());
        let mut scores = vec![0.0; 36];
        scores[lo] = 0.5;
        scores[hi] = 0.5;
        let got = s
            .decode_angle_circular(&ScoreVector::new(scores.clone()))
            .unwrap();
        assert!((got.abs() - PI).abs() < 1e-9, "got {got}");
        // The plain weighted sum lands near 0 instead.
        let plain = s.decode(&ScoreVector::new(scores)).unwrap();
        assert!(plain.abs() < 0.1);
    }

    #[test]
    fn circular_decode_tracks_plain_decode_for_unimodal_scores() {
        let s = DofSchedules::default().angle;
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..500 {
            // Unimodal mass away from the wrap seam.
            let c = rng.random_range(4..32);
            let mut scores = vec![0.0; 36];
            scores[c] = rng.random_range(0.5..0.9);
            scores[c - 1] = rng.random_range(0.0..0.25);
            scores[c + 1] = rng.random_range(0.0..0.25);
            let sv = ScoreVector::new(scores);
            let plain = s.decode(&sv).unwrap();
            let circ = s.decode_angle_circular(&sv).unwrap();
            assert!((plain - circ).abs() < s.step / 2.0);
        }
    }

    #[test]
    fn quantization_bounds() {
        let s = DofSchedules::default();
        assert!((s.height.quantization_error_bound() - 0.05).abs() < 1e-12);
        assert!((s.length.quantization_error_bound() - 0.1).abs() < 1e-12);
        assert!((s.depth.quantization_error_bound() - 1.0).abs() < 1e-12);
        // The bound is exactly half the last (widest) LinearGrowth bin.
        assert!((s.depth.width(99) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn round_trip_error_within_half_bin_width() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dof in Dof::ALL {
            let s = DofSchedules::default();
            let s = s.get(dof);
            let (lo, hi) = s.span();
            for _ in 0..20_000 {
                let v = rng.random_range(lo..hi);
                let i = s.bin_index(v);
                assert_eq!(i, bin_index_by_scan(s, v));
                let decoded = s.decode(&s.encode_one_hot(v)).unwrap();
                assert!((decoded - v).abs() <= s.width(i) / 2.0 + 1e-12);
            }
        }
    }

    #[test]
    fn decode_is_linear_in_scores() {
        let s = DofSchedules::default().depth;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let a = ScoreVector::new((0..100).map(|_| rng.random_range(0.0..1.0)).collect());
            let b = ScoreVector::new((0..100).map(|_| rng.random_range(0.0..1.0)).collect());
            let mut a = a;
            let mut b = b;
            a.normalize();
            b.normalize();
            let lambda: f64 = rng.random_range(0.0..1.0);
            let mixed = ScoreVector::new(
                a.scores
                    .iter()
                    .zip(&b.scores)
                    .map(|(x, y)| lambda * x + (1.0 - lambda) * y)
                    .collect(),
            );
            let lhs = s.decode(&mixed).unwrap();
            let rhs = lambda * s.decode(&a).unwrap() + (1.0 - lambda) * s.decode(&b).unwrap();
            assert!((lhs - rhs).abs() < 1e-9);
        }
    }

    #[test]
    fn config_round_trip() {
        let schedules = DofSchedules {
            depth: BinSchedule::uniform(0.0, 100, 1.0).unwrap(),
            angle: BinSchedule::uniform(-PI, 72, PI / 36.0).unwrap(),
            ..DofSchedules::default()
        };
        let text = schedules.to_config_string();
        let back = DofSchedules::from_config_str(&text).unwrap();
        assert_eq!(schedules, back);
    }

    #[test]
    fn config_rejects_malformed_lines() {
        assert!(matches!(
            DofSchedules::from_config_str("height uniform 1.2 8"),
            Err(CodecError::Config { line: 1, .. })
        ));
        assert!(matches!(
            DofSchedules::from_config_str("pitch uniform 0 4 1.0"),
            Err(CodecError::Config { line: 1, .. })
        ));
        assert!(matches!(
            DofSchedules::from_config_str("depth wedge 0 4 1.0"),
            Err(CodecError::Config { line: 1, .. })
        ));
    }

    #[test]
    fn schedule_constructor_validates() {
        assert!(BinSchedule::uniform(0.0, 0, 1.0).is_err());
        assert!(BinSchedule::uniform(0.0, 4, 0.0).is_err());
        assert!(BinSchedule::uniform(0.0, 4, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn bin_index_matches_scan_everywhere(v in -200.0f64..200.0) {
            let defaults = DofSchedules::default();
            for dof in Dof::ALL {
                let s = defaults.get(dof);
                prop_assert_eq!(s.bin_index(v), bin_index_by_scan(s, v));
            }
        }
    }
}
