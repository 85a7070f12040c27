//! Recover the 3D translation of a box from its 2D bounding box, dimensions,
//! and yaw.
//!
//! Each edge of a tight 2D box is touched by the projection of some 3D box
//! corner, which turns the four edge coordinates into four linear tangency
//! constraints on the translation `T = (T_x, T_y, T_z)`. The toucher
//! assignment is not known in advance, so the solver enumerates candidate
//! corner configurations, solves the 4x3 system per configuration by least
//! squares, and keeps the physically valid solution (`T_z > 0`) whose
//! reconstructed box reprojects closest to the input 2D box.
//!
//! With a yaw-only rotation the 4096 raw corner assignments collapse to 64
//! candidates that provably contain the correct one:
//! - both corners of a vertical box edge project to the same `u`, so the
//!   left/right 2D edges each range over the 4 vertical edges;
//! - a top (resp. bottom) corner's `v` is monotone in `1/z` at fixed height,
//!   so the extreme-`v` touchers lie on the nearest or farthest vertical
//!   edge, computable from the yaw alone: 2 candidates each.

use nalgebra::{Matrix3, Matrix4x3, Vector3, Vector4};
use thiserror::Error;

use crate::box_geometry::{corner_offsets, rotate_y, BBox2D, Box3D, Dimensions};
use crate::camera::{project, CameraIntrinsics, CameraPoint};

/// Normal-equation conditioning beyond which the solver falls back to a
/// rank-revealing SVD of the raw system.
const CONDITION_LIMIT: f64 = 1e12;
/// Denominators closer to zero than this make a configuration degenerate.
const DENOM_EPS: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum SolveError {
    /// The 2D box edge sits on the principal point, so the tangency
    /// system's row denominators vanish.
    #[error("degenerate configuration: edge-to-principal-point denominator below {DENOM_EPS}")]
    DegenerateConfiguration,
    #[error("degenerate 2D box")]
    DegenerateBox,
    #[error("no configuration yields a solution in front of the camera")]
    NoPhysicalSolution,
}

/// Assignment of box corners to the four 2D box edges they touch. Indices
/// refer to the fixed corner order of [`crate::box_geometry::corners`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CornerConfiguration {
    pub x_min_corner: usize,
    pub y_min_corner: usize,
    pub x_max_corner: usize,
    pub y_max_corner: usize,
}

/// A recovered translation with its selection diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslationSolution {
    /// Translation of the box origin (bottom-face center), camera frame.
    pub translation: CameraPoint,
    /// Least-squares residual `||A*T - b||` of the winning configuration.
    pub residual: f64,
    /// Tight-hull reprojection error against the input box, summed over the
    /// four edge coordinates (pixels).
    pub reprojection_error: f64,
    pub configuration: CornerConfiguration,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SolverOptions {
    /// Divide the fourth right-hand-side entry by `v0 - x_min` instead of
    /// `v0 - y_max`. The symmetric default encodes the actual bottom-edge
    /// tangency; the alternate divisor is kept for comparison runs.
    pub alternate_row4_divisor: bool,
}

/// Extract the x coordinate of a homogeneous image vector: `x / z`.
pub fn homogeneous_x(v: &Vector3<f64>) -> f64 {
    v.x / v.z
}

/// Extract the y coordinate of a homogeneous image vector: `y / z`.
pub fn homogeneous_y(v: &Vector3<f64>) -> f64 {
    v.y / v.z
}

/// Rotated corner offset `R * X_i` for the box's object-frame corner `i`.
fn rotated_corner(dims: &Dimensions, yaw: f64, index: usize) -> Vector3<f64> {
    let (x, y, z) = corner_offsets(dims)[index];
    let (rx, rz) = rotate_y(x, z, yaw);
    Vector3::new(rx, y, rz)
}

/// Build the 4x3 tangency system `A * T = b` for one corner configuration.
///
/// Rows constrain, in order: `x_min`, `y_min`, `x_max`, `y_max`. The
/// calibration's baked-in fourth projection column contributes exact extra
/// terms to `b`; they vanish for a bare-intrinsics camera.
pub fn build_system(
    box2d: &BBox2D,
    dims: &Dimensions,
    yaw: f64,
    k: &CameraIntrinsics,
    config: &CornerConfiguration,
    options: &SolverOptions,
) -> Result<(Matrix4x3<f64>, Vector4<f64>), SolveError> {
    let (ax, ay, u0, v0) = (k.alpha_x, k.alpha_y, k.u0, k.v0);
    let [p4x, p4y, p4z] = k.translation_column();
    let du_max = u0 - box2d.right;
    let dv_max = v0 - box2d.bottom;
    if du_max.abs() < DENOM_EPS || dv_max.abs() < DENOM_EPS {
        return Err(SolveError::DegenerateConfiguration);
    }

    let r0 = rotated_corner(dims, yaw, config.x_min_corner);
    let r1 = rotated_corner(dims, yaw, config.y_min_corner);
    let r2 = rotated_corner(dims, yaw, config.x_max_corner);
    let r3 = rotated_corner(dims, yaw, config.y_max_corner);

    #[rustfmt::skip]
    let a = Matrix4x3::new(
        -1.0,           0.0,            (box2d.left - u0) / ax,
         0.0,          -1.0,            (box2d.top - v0) / ay,
        -ax / du_max,   0.0,            -1.0,
         0.0,          -ay / dv_max,    -1.0,
    );

    let row4_div = if options.alternate_row4_divisor {
        v0 - box2d.left
    } else {
        dv_max
    };
    if row4_div.abs() < DENOM_EPS {
        return Err(SolveError::DegenerateConfiguration);
    }
    let b = Vector4::new(
        r0.x + ((u0 - box2d.left) * r0.z + p4x - box2d.left * p4z) / ax,
        r1.y + ((v0 - box2d.top) * r1.z + p4y - box2d.top * p4z) / ay,
        r2.z + (ax * r2.x + p4x - box2d.right * p4z) / du_max,
        r3.z + (ay * r3.y + p4y - box2d.bottom * p4z) / row4_div,
    );
    Ok((a, b))
}

/// Least squares via normal equations, falling back to an SVD solve of the
/// raw system when `A^T A` is ill-conditioned.
fn least_squares(a: &Matrix4x3<f64>, b: &Vector4<f64>) -> Option<Vector3<f64>> {
    let ata: Matrix3<f64> = a.transpose() * a;
    let atb: Vector3<f64> = a.transpose() * b;
    let eigen = ata.symmetric_eigen();
    let max_ev = eigen.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
    let min_ev = eigen.eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
    let well_conditioned = min_ev > 0.0 && max_ev / min_ev < CONDITION_LIMIT;
    if well_conditioned {
        if let Some(t) = ata.lu().solve(&atb) {
            return Some(t);
        }
    }
    a.svd(true, true).solve(b, 1e-14).ok()
}

/// The 64 corner configurations consistent with a yaw-only rotation.
fn candidate_configurations(dims: &Dimensions, yaw: f64) -> Vec<CornerConfiguration> {
    // Depth offsets of the four vertical edges, identified by their bottom
    // corner 0..4; translation does not change their ordering.
    let z_offsets: Vec<f64> = (0..4).map(|i| rotated_corner(dims, yaw, i).z).collect();
    let nearest = (0..4)
        .min_by(|&a, &b| z_offsets[a].total_cmp(&z_offsets[b]))
        .unwrap();
    let farthest = (0..4)
        .max_by(|&a, &b| z_offsets[a].total_cmp(&z_offsets[b]))
        .unwrap();

    let mut configs = Vec::with_capacity(64);
    for x_min_corner in 0..4 {
        for x_max_corner in 0..4 {
            for y_min_edge in [nearest, farthest] {
                for y_max_edge in [nearest, farthest] {
                    configs.push(CornerConfiguration {
                        x_min_corner,
                        // Extreme-v touchers: top corners for y_min,
                        // bottom corners for y_max.
                        y_min_corner: y_min_edge + 4,
                        x_max_corner,
                        y_max_corner: y_max_edge,
                    });
                }
            }
        }
    }
    configs
}

/// Tight hull of the projected box corners; `None` if any corner fails to
/// project (behind the camera).
fn projected_hull(box3d: &Box3D, k: &CameraIntrinsics) -> Option<BBox2D> {
    let mut hull: Option<BBox2D> = None;
    for corner in crate::box_geometry::corners(box3d) {
        let p = project(corner, k).ok()?;
        hull = Some(match hull {
            None => BBox2D::new(p.u, p.v, p.u, p.v),
            Some(h) => BBox2D::new(
                h.left.min(p.u),
                h.top.min(p.v),
                h.right.max(p.u),
                h.bottom.max(p.v),
            ),
        });
    }
    hull
}

fn reprojection_error(target: &BBox2D, hull: &BBox2D) -> f64 {
    (hull.left - target.left).abs()
        + (hull.top - target.top).abs()
        + (hull.right - target.right).abs()
        + (hull.bottom - target.bottom).abs()
}

/// Recover the translation explaining a tight 2D box.
///
/// Enumerates the 64 yaw-consistent corner configurations, solves each by
/// least squares, and returns the `T_z > 0` solution with minimal tight-hull
/// reprojection error; exact ties fall to the smaller residual. The
/// enumeration order is fixed, so the result is deterministic.
pub fn solve_translation(
    box2d: &BBox2D,
    dims: &Dimensions,
    yaw: f64,
    k: &CameraIntrinsics,
) -> Result<TranslationSolution, SolveError> {
    solve_translation_with(box2d, dims, yaw, k, &SolverOptions::default())
}

pub fn solve_translation_with(
    box2d: &BBox2D,
    dims: &Dimensions,
    yaw: f64,
    k: &CameraIntrinsics,
    options: &SolverOptions,
) -> Result<TranslationSolution, SolveError> {
    if box2d.right <= box2d.left || box2d.bottom <= box2d.top {
        return Err(SolveError::DegenerateBox);
    }
    let mut degenerate = 0usize;
    let mut best: Option<TranslationSolution> = None;
    let configs = candidate_configurations(dims, yaw);
    let n_configs = configs.len();
    for configuration in configs {
        let (a, b) = match build_system(box2d, dims, yaw, k, &configuration, options) {
            Ok(system) => system,
            Err(SolveError::DegenerateConfiguration) => {
                degenerate += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let Some(t) = least_squares(&a, &b) else {
            continue;
        };
        if !t.iter().all(|v| v.is_finite()) || t.z <= 0.0 {
            continue;
        }
        let translation = CameraPoint::new(t.x, t.y, t.z);
        let candidate_box = Box3D::new(*dims, translation, yaw);
        let Some(hull) = projected_hull(&candidate_box, k) else {
            continue;
        };
        let reproj = reprojection_error(box2d, &hull);
        let residual = (a * t - b).norm();
        let better = match &best {
            None => true,
            Some(cur) => {
                reproj < cur.reprojection_error
                    || (reproj == cur.reprojection_error && residual < cur.residual)
            }
        };
        if better {
            best = Some(TranslationSolution {
                translation,
                residual,
                reprojection_error: reproj,
                configuration,
            });
        }
    }
    if degenerate == n_configs {
        return Err(SolveError::DegenerateConfiguration);
    }
    best.ok_or(SolveError::NoPhysicalSolution)
}
