//! Pinhole camera model: projection, the two offset back-projection solvers,
//! and conversion between global yaw and the observation angle.
//!
//! All angles are radians normalized to `[-pi, pi)`. The camera frame follows
//! the KITTI convention: x right, y down, z forward; only points with z > 0
//! are in front of the camera.

use std::f64::consts::{PI, TAU};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CameraError {
    /// Projection requested for a point at or behind the image plane.
    #[error("point behind camera (depth {depth})")]
    BehindCamera { depth: f64 },
    /// The viewing-ray angle is undefined for an object at the camera origin.
    #[error("object at camera origin")]
    AtOrigin,
    #[error("non-positive focal length ({alpha_x}, {alpha_y})")]
    BadFocalLength { alpha_x: f64, alpha_y: f64 },
}

/// A pixel position on the image plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImagePoint {
    pub u: f64,
    pub v: f64,
}

/// A point in the camera frame, in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl CameraPoint {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }
}

/// Pinhole intrinsics plus the full 3x4 projection the calibration file came
/// with. For rectified KITTI cameras the fourth column carries the baked-in
/// stereo-rig translation; a camera built from bare intrinsics has a zero
/// fourth column and the two projection paths coincide.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraIntrinsics {
    pub alpha_x: f64,
    pub alpha_y: f64,
    pub u0: f64,
    pub v0: f64,
    /// Row-major 3x4 projection matrix.
    pub full_projection: [[f64; 4]; 3],
}

impl CameraIntrinsics {
    /// Camera from bare intrinsics; the fourth projection column is zero.
    pub fn new(alpha_x: f64, alpha_y: f64, u0: f64, v0: f64) -> Result<Self, CameraError> {
        if alpha_x <= 0.0 || alpha_y <= 0.0 {
            return Err(CameraError::BadFocalLength { alpha_x, alpha_y });
        }
        Ok(Self {
            alpha_x,
            alpha_y,
            u0,
            v0,
            full_projection: [
                [alpha_x, 0.0, u0, 0.0],
                [0.0, alpha_y, v0, 0.0],
                [0.0, 0.0, 1.0, 0.0],
            ],
        })
    }

    /// Camera from a row-major 3x4 projection matrix (a KITTI `P2` entry).
    pub fn from_projection(p: [[f64; 4]; 3]) -> Result<Self, CameraError> {
        let (alpha_x, alpha_y) = (p[0][0], p[1][1]);
        if alpha_x <= 0.0 || alpha_y <= 0.0 {
            return Err(CameraError::BadFocalLength { alpha_x, alpha_y });
        }
        Ok(Self {
            alpha_x,
            alpha_y,
            u0: p[0][2],
            v0: p[1][2],
            full_projection: p,
        })
    }

    /// Fourth column of the projection matrix (zero for bare intrinsics).
    pub fn translation_column(&self) -> [f64; 3] {
        [
            self.full_projection[0][3],
            self.full_projection[1][3],
            self.full_projection[2][3],
        ]
    }

    fn has_translation_column(&self) -> bool {
        self.translation_column().iter().any(|&t| t != 0.0)
    }
}

/// Project a camera-frame point to the image plane.
///
/// Uses the full 3x4 matrix when its fourth column is nonzero, otherwise the
/// closed form `u = alpha_x * x / z + u0`, `v = alpha_y * y / z + v0`.
pub fn project(p: CameraPoint, k: &CameraIntrinsics) -> Result<ImagePoint, CameraError> {
    if k.has_translation_column() {
        let m = &k.full_projection;
        let hom = [p.x, p.y, p.z, 1.0];
        let row = |r: &[f64; 4]| r[0] * hom[0] + r[1] * hom[1] + r[2] * hom[2] + r[3];
        let depth = row(&m[2]);
        if depth <= 0.0 {
            return Err(CameraError::BehindCamera { depth });
        }
        Ok(ImagePoint {
            u: row(&m[0]) / depth,
            v: row(&m[1]) / depth,
        })
    } else {
        if p.z <= 0.0 {
            return Err(CameraError::BehindCamera { depth: p.z });
        }
        Ok(ImagePoint {
            u: k.alpha_x * p.x / p.z + k.u0,
            v: k.alpha_y * p.y / p.z + k.v0,
        })
    }
}

/// Recover (x, y) from a region center (u, v), an image-space offset (du, dv)
/// to the projected object center, and a depth:
/// `x = z/alpha_x * (u + du - u0)`, `y = z/alpha_y * (v + dv - v0)`.
pub fn solve_xy_from_image_offset(
    u: f64,
    v: f64,
    du: f64,
    dv: f64,
    z: f64,
    k: &CameraIntrinsics,
) -> Result<(f64, f64), CameraError> {
    if z <= 0.0 {
        return Err(CameraError::BehindCamera { depth: z });
    }
    Ok((
        z / k.alpha_x * (u + du - k.u0),
        z / k.alpha_y * (v + dv - k.v0),
    ))
}

/// Recover (x, y) from a region center (u, v), a camera-space offset (dx, dy)
/// between the back-projected region center and the object center, and a
/// depth: `x = z*(u - u0)/alpha_x - dx`, `y = z*(v - v0)/alpha_y - dy`.
pub fn solve_xy_from_camera_offset(
    u: f64,
    v: f64,
    dx: f64,
    dy: f64,
    z: f64,
    k: &CameraIntrinsics,
) -> Result<(f64, f64), CameraError> {
    if z <= 0.0 {
        return Err(CameraError::BehindCamera { depth: z });
    }
    Ok((
        z * (u - k.u0) / k.alpha_x - dx,
        z * (v - k.v0) / k.alpha_y - dy,
    ))
}

/// Normalize an angle to `[-pi, pi)`. Exactly idempotent: in-range values
/// pass through untouched.
pub fn wrap_to_pi(theta: f64) -> f64 {
    if (-PI..PI).contains(&theta) {
        return theta;
    }
    (theta + PI).rem_euclid(TAU) - PI
}

/// Convert global yaw to the observation angle, measured relative to the ray
/// from the camera center through the object center instead of the camera
/// z-axis: `alpha = rotation_y - atan2(x, z)`.
pub fn ry_to_alpha(rotation_y: f64, x: f64, z: f64) -> Result<f64, CameraError> {
    if x == 0.0 && z == 0.0 {
        return Err(CameraError::AtOrigin);
    }
    Ok(wrap_to_pi(rotation_y - x.atan2(z)))
}

/// Inverse of [`ry_to_alpha`]: `rotation_y = alpha + atan2(x, z)`.
pub fn alpha_to_ry(alpha: f64, x: f64, z: f64) -> Result<f64, CameraError> {
    if x == 0.0 && z == 0.0 {
        return Err(CameraError::AtOrigin);
    }
    Ok(wrap_to_pi(alpha + x.atan2(z)))
}
