//! KITTI-format plain-text I/O: label files, prediction files (labels plus a
//! trailing score), and calibration files.
//!
//! Parsing is total over well-formed lines: DontCare rows keep their -1/-1000
//! sentinel values and are filtered by the evaluator, never by the parser.
//! Serialization writes the fixed 2-decimal precision of the distributed
//! dataset files, so serialize(parse(file)) is byte-stable after one
//! normalization pass.
//!
//! Directory layout convention: `label_2/NNNNNN.txt`, `calib/NNNNNN.txt`,
//! predictions mirrored with one file per frame.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::box_geometry::{BBox2D, Box3D, Dimensions};
use crate::camera::{CameraIntrinsics, CameraPoint};

pub const LABEL_FIELDS: usize = 15;
pub const PREDICTION_FIELDS: usize = 16;

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("line {line}: expected {expected} fields, found {found}")]
    FieldCount {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: field {field} ({name}): invalid number {value:?}")]
    InvalidNumber {
        line: usize,
        field: usize,
        name: &'static str,
        value: String,
    },
    #[error("line {line}: degenerate 2D box")]
    DegenerateBox2D { line: usize },
    #[error("P2 missing")]
    MissingP2,
    #[error("P2 entry has {found} values, expected 12")]
    BadP2Count { found: usize },
    #[error("P2 entry has non-positive focal lengths")]
    BadP2Focal,
}

/// A file-level error carrying the offending path.
#[derive(Debug, Error)]
pub enum FileError {
    #[error("{}: {source}", path.display())]
    Parse {
        path: PathBuf,
        #[source]
        source: ParseError,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// One annotated object from a label file.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthObject {
    pub class_name: String,
    /// Fraction of the object outside the image, in [0, 1] (-1 for DontCare).
    pub truncation: f64,
    /// 0 fully visible, 1 partly occluded, 2 largely occluded, 3 unknown
    /// (-1 for DontCare).
    pub occlusion: i32,
    /// Observation angle, radians in [-pi, pi).
    pub alpha: f64,
    pub box2d: BBox2D,
    pub dims: Dimensions,
    /// Bottom-face center in the camera frame.
    pub location: CameraPoint,
    /// Yaw about the camera y-axis, radians in [-pi, pi).
    pub rotation_y: f64,
}

impl GroundTruthObject {
    pub fn is_dont_care(&self) -> bool {
        self.class_name == "DontCare"
    }

    pub fn box3d(&self) -> Box3D {
        Box3D::new(self.dims, self.location, self.rotation_y)
    }
}

/// A predicted object: label fields plus a confidence score.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub object: GroundTruthObject,
    pub score: f64,
}

/// Parsed calibration file; only the P2 (left color camera) entry is used.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationFile {
    pub projection: CameraIntrinsics,
}

const FIELD_NAMES: [&str; 16] = [
    "type",
    "truncated",
    "occluded",
    "alpha",
    "bbox_left",
    "bbox_top",
    "bbox_right",
    "bbox_bottom",
    "height",
    "width",
    "length",
    "x",
    "y",
    "z",
    "rotation_y",
    "score",
];

fn parse_f64(token: &str, line: usize, field: usize) -> Result<f64, ParseError> {
    token.parse::<f64>().map_err(|_| ParseError::InvalidNumber {
        line,
        field,
        name: FIELD_NAMES[field],
        value: token.to_string(),
    })
}

fn parse_occlusion(token: &str, line: usize) -> Result<i32, ParseError> {
    let raw = parse_f64(token, line, 2)?;
    if !raw.is_finite() || (raw - raw.round()).abs() > 1e-9 {
        return Err(ParseError::InvalidNumber {
            line,
            field: 2,
            name: FIELD_NAMES[2],
            value: token.to_string(),
        });
    }
    Ok(raw.round() as i32)
}

fn parse_object_line(fields: &[&str], line: usize) -> Result<GroundTruthObject, ParseError> {
    let box2d = BBox2D::new(
        parse_f64(fields[4], line, 4)?,
        parse_f64(fields[5], line, 5)?,
        parse_f64(fields[6], line, 6)?,
        parse_f64(fields[7], line, 7)?,
    );
    if box2d.right <= box2d.left || box2d.bottom <= box2d.top {
        return Err(ParseError::DegenerateBox2D { line });
    }
    Ok(GroundTruthObject {
        class_name: fields[0].to_string(),
        truncation: parse_f64(fields[1], line, 1)?,
        occlusion: parse_occlusion(fields[2], line)?,
        alpha: parse_f64(fields[3], line, 3)?,
        box2d,
        dims: Dimensions::new(
            parse_f64(fields[8], line, 8)?,
            parse_f64(fields[9], line, 9)?,
            parse_f64(fields[10], line, 10)?,
        ),
        location: CameraPoint::new(
            parse_f64(fields[11], line, 11)?,
            parse_f64(fields[12], line, 12)?,
            parse_f64(fields[13], line, 13)?,
        ),
        rotation_y: parse_f64(fields[14], line, 14)?,
    })
}

/// Parse a label file: one object per non-blank line, in file order.
pub fn parse_label_file(text: &str) -> Result<Vec<GroundTruthObject>, ParseError> {
    let mut objects = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.len() != LABEL_FIELDS {
            return Err(ParseError::FieldCount {
                line,
                expected: LABEL_FIELDS,
                found: fields.len(),
            });
        }
        objects.push(parse_object_line(&fields, line)?);
    }
    Ok(objects)
}

/// Parse a prediction file: label fields plus a 16th score field.
pub fn parse_prediction_file(text: &str) -> Result<Vec<Detection>, ParseError> {
    let mut detections = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.len() != PREDICTION_FIELDS {
            return Err(ParseError::FieldCount {
                line,
                expected: PREDICTION_FIELDS,
                found: fields.len(),
            });
        }
        detections.push(Detection {
            object: parse_object_line(&fields[..LABEL_FIELDS], line)?,
            // Out-of-range scores are stored as-is; the validator flags them.
            score: parse_f64(fields[15], line, 15)?,
        });
    }
    Ok(detections)
}

/// Extract intrinsics from a calibration file's `P2:` entry
/// (12 row-major values of a 3x4 projection).
pub fn parse_calib_file(text: &str) -> Result<CalibrationFile, ParseError> {
    for raw in text.lines() {
        let Some(rest) = raw.trim().strip_prefix("P2:") else {
            continue;
        };
        let values: Result<Vec<f64>, _> =
            rest.split_whitespace().map(|t| t.parse::<f64>()).collect();
        let values = values.map_err(|_| ParseError::BadP2Count {
            found: rest.split_whitespace().count(),
        })?;
        if values.len() != 12 {
            return Err(ParseError::BadP2Count {
                found: values.len(),
            });
        }
        let rows = [
            [values[0], values[1], values[2], values[3]],
            [values[4], values[5], values[6], values[7]],
            [values[8], values[9], values[10], values[11]],
        ];
        let projection =
            CameraIntrinsics::from_projection(rows).map_err(|_| ParseError::BadP2Focal)?;
        return Ok(CalibrationFile { projection });
    }
    Err(ParseError::MissingP2)
}

fn format_object(o: &GroundTruthObject) -> String {
    format!(
        "{} {:.2} {} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2}",
        o.class_name,
        o.truncation,
        o.occlusion,
        o.alpha,
        o.box2d.left,
        o.box2d.top,
        o.box2d.right,
        o.box2d.bottom,
        o.dims.height,
        o.dims.width,
        o.dims.length,
        o.location.x,
        o.location.y,
        o.location.z,
        o.rotation_y,
    )
}

/// Serialize objects at the dataset's fixed 2-decimal precision.
pub fn serialize_labels(objects: &[GroundTruthObject]) -> String {
    objects.iter().map(|o| format_object(o) + "\n").collect()
}

pub fn serialize_predictions(detections: &[Detection]) -> String {
    detections
        .iter()
        .map(|d| format!("{} {:.2}\n", format_object(&d.object), d.score))
        .collect()
}

/// Write a calibration file holding the camera's P2 entry. Values keep full
/// precision so the matrix survives a file round trip bit-identically.
pub fn serialize_calib(calib: &CalibrationFile) -> String {
    let p = &calib.projection.full_projection;
    let values: Vec<String> = p
        .iter()
        .flat_map(|row| row.iter().map(|v| format!("{v:?}")))
        .collect();
    format!("P2: {}\n", values.join(" "))
}

/// Non-fatal consistency findings on parsed label objects.
pub fn validate_objects(objects: &[GroundTruthObject]) -> Vec<String> {
    let mut findings = Vec::new();
    for (i, o) in objects.iter().enumerate() {
        if o.is_dont_care() {
            continue;
        }
        if !(0.0..=1.0).contains(&o.truncation) {
            findings.push(format!(
                "object {i}: truncation {:.2} outside [0, 1]",
                o.truncation
            ));
        }
        if !(0..=3).contains(&o.occlusion) {
            findings.push(format!(
                "object {i}: occlusion code {} unknown",
                o.occlusion
            ));
        }
        if o.dims.height <= 0.0 || o.dims.width <= 0.0 || o.dims.length <= 0.0 {
            findings.push(format!(
                "object {i}: non-positive dimensions for class {}",
                o.class_name
            ));
        }
    }
    findings
}

/// [`validate_objects`] plus detection-specific checks.
pub fn validate_detections(detections: &[Detection]) -> Vec<String> {
    let objects: Vec<GroundTruthObject> = detections.iter().map(|d| d.object.clone()).collect();
    let mut findings = validate_objects(&objects);
    for (i, d) in detections.iter().enumerate() {
        if !d.score.is_finite() {
            findings.push(format!("detection {i}: non-finite score"));
        } else if !(0.0..=1.0).contains(&d.score) {
            findings.push(format!(
                "detection {i}: score {:.2} outside [0, 1]",
                d.score
            ));
        }
    }
    findings
}

fn read_to_string(path: &Path) -> Result<String, FileError> {
    fs::read_to_string(path).map_err(|source| FileError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn frame_files(dir: &Path) -> Result<Vec<(String, PathBuf)>, FileError> {
    let entries = fs::read_dir(dir).map_err(|source| FileError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut files = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| FileError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let path = entry.path();
        if path.extension().is_some_and(|e| e == "txt") {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                files.push((stem.to_string(), path));
            }
        }
    }
    files.sort();
    Ok(files)
}

fn parse_ctx<T>(path: &Path, result: Result<T, ParseError>) -> Result<T, FileError> {
    result.map_err(|source| FileError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

/// Read every `*.txt` label file in a directory, keyed by frame id (file stem).
pub fn read_label_dir(dir: &Path) -> Result<BTreeMap<String, Vec<GroundTruthObject>>, FileError> {
    let mut frames = BTreeMap::new();
    for (id, path) in frame_files(dir)? {
        let text = read_to_string(&path)?;
        frames.insert(id, parse_ctx(&path, parse_label_file(&text))?);
    }
    Ok(frames)
}

pub fn read_prediction_dir(dir: &Path) -> Result<BTreeMap<String, Vec<Detection>>, FileError> {
    let mut frames = BTreeMap::new();
    for (id, path) in frame_files(dir)? {
        let text = read_to_string(&path)?;
        frames.insert(id, parse_ctx(&path, parse_prediction_file(&text))?);
    }
    Ok(frames)
}

pub fn read_calib_dir(dir: &Path) -> Result<BTreeMap<String, CalibrationFile>, FileError> {
    let mut frames = BTreeMap::new();
    for (id, path) in frame_files(dir)? {
        let text = read_to_string(&path)?;
        frames.insert(id, parse_ctx(&path, parse_calib_file(&text))?);
    }
    Ok(frames)
}

fn write_file(path: &Path, contents: &str) -> Result<(), FileError> {
    fs::write(path, contents).map_err(|source| FileError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn ensure_dir(dir: &Path) -> Result<(), FileError> {
    fs::create_dir_all(dir).map_err(|source| FileError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

pub fn write_label_dir(
    dir: &Path,
    frames: &BTreeMap<String, Vec<GroundTruthObject>>,
) -> Result<(), FileError> {
    ensure_dir(dir)?;
    for (id, objects) in frames {
        write_file(&dir.join(format!("{id}.txt")), &serialize_labels(objects))?;
    }
    Ok(())
}

pub fn write_prediction_dir(
    dir: &Path,
    frames: &BTreeMap<String, Vec<Detection>>,
) -> Result<(), FileError> {
    ensure_dir(dir)?;
    for (id, detections) in frames {
        write_file(
            &dir.join(format!("{id}.txt")),
            &serialize_predictions(detections),
        )?;
    }
    Ok(())
}

pub fn write_calib_dir(
    dir: &Path,
    frames: &BTreeMap<String, CalibrationFile>,
) -> Result<(), FileError> {
    ensure_dir(dir)?;
    for (id, calib) in frames {
        write_file(&dir.join(format!("{id}.txt")), &serialize_calib(calib))?;
    }
    Ok(())
}
