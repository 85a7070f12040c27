//! Oriented 3D boxes: corner generation, bird's-eye-view footprints, convex
//! polygon clipping, rotated 3D IoU, and BEV SVG rendering.
//!
//! Boxes follow the KITTI convention: the location is the center of the
//! bottom face, y points down, and the only rotation is a yaw about the
//! camera y-axis. Because the boxes share a vertical axis, the 3D
//! intersection volume factors exactly into a ground-plane polygon
//! intersection times a vertical interval overlap.

use crate::camera::{wrap_to_pi, CameraPoint};

/// Collinearity tolerance for clipped polygon edges.
const EDGE_EPS: f64 = 1e-12;

/// Box extents in meters, KITTI field order (height, width, length).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dimensions {
    pub height: f64,
    pub width: f64,
    pub length: f64,
}

impl Dimensions {
    pub fn new(height: f64, width: f64, length: f64) -> Self {
        Self {
            height,
            width,
            length,
        }
    }

    pub fn volume(&self) -> f64 {
        self.height * self.width * self.length
    }
}

/// Axis-aligned 2D box in pixel coordinates, (left, top, right, bottom).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox2D {
    pub left: f64,
    pub top: f64,
    pub right: f64,
    pub bottom: f64,
}

impl BBox2D {
    pub fn new(left: f64, top: f64, right: f64, bottom: f64) -> Self {
        Self {
            left,
            top,
            right,
            bottom,
        }
    }

    pub fn width(&self) -> f64 {
        self.right - self.left
    }

    pub fn height(&self) -> f64 {
        self.bottom - self.top
    }

    pub fn area(&self) -> f64 {
        self.width().max(0.0) * self.height().max(0.0)
    }

    pub fn center(&self) -> (f64, f64) {
        (
            (self.left + self.right) / 2.0,
            (self.top + self.bottom) / 2.0,
        )
    }

    pub fn intersection_area(&self, other: &BBox2D) -> f64 {
        let w = self.right.min(other.right) - self.left.max(other.left);
        let h = self.bottom.min(other.bottom) - self.top.max(other.top);
        w.max(0.0) * h.max(0.0)
    }
}

/// An oriented 3D bounding box with KITTI semantics: `location` is the
/// bottom-face center and `yaw` rotates about the camera y-axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Box3D {
    pub dims: Dimensions,
    pub location: CameraPoint,
    pub yaw: f64,
}

impl Box3D {
    /// Builds a box, normalizing the yaw to `[-pi, pi)`. Dimensions must be
    /// positive for the geometric operations to be meaningful.
    pub fn new(dims: Dimensions, location: CameraPoint, yaw: f64) -> Self {
        Self {
            dims,
            location,
            yaw: wrap_to_pi(yaw),
        }
    }

    pub fn volume(&self) -> f64 {
        self.dims.volume()
    }

    /// Vertical extent as (top, bottom) in camera y, with y pointing down:
    /// the box spans `[location.y - height, location.y]`.
    pub fn y_interval(&self) -> (f64, f64) {
        (self.location.y - self.dims.height, self.location.y)
    }
}

/// Object-frame corner offsets before rotation. Corners 0-3 are the bottom
/// face, 4-7 the top face directly above them; corner k+4 shares the (x, z)
/// offsets of corner k.
pub(crate) fn corner_offsets(dims: &Dimensions) -> [(f64, f64, f64); 8] {
    let (h, w, l) = (dims.height, dims.width, dims.length);
    let (hx, hz) = (l / 2.0, w / 2.0);
    [
        (hx, 0.0, hz),
        (hx, 0.0, -hz),
        (-hx, 0.0, -hz),
        (-hx, 0.0, hz),
        (hx, -h, hz),
        (hx, -h, -hz),
        (-hx, -h, -hz),
        (-hx, -h, hz),
    ]
}

/// Rotate a ground-plane (x, z) vector about the camera y-axis by `yaw`.
pub fn rotate_y(x: f64, z: f64, yaw: f64) -> (f64, f64) {
    let (s, c) = yaw.sin_cos();
    (x * c + z * s, -x * s + z * c)
}

/// The 8 corners of a box in the camera frame, in the fixed order of
/// [`corner_offsets`].
pub fn corners(b: &Box3D) -> [CameraPoint; 8] {
    corner_offsets(&b.dims).map(|(x, y, z)| {
        let (rx, rz) = rotate_y(x, z, b.yaw);
        CameraPoint::new(rx + b.location.x, y + b.location.y, rz + b.location.z)
    })
}

/// Convex polygon on the ground (x, z) plane, vertices counter-clockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon2D {
    pub vertices: Vec<(f64, f64)>,
}

impl ConvexPolygon2D {
    pub fn new(vertices: Vec<(f64, f64)>) -> Self {
        Self { vertices }
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() < 3
    }

    /// Shoelace area; degenerate polygons (< 3 vertices) have area 0.
    pub fn area(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        let n = self.vertices.len();
        let mut twice = 0.0;
        for i in 0..n {
            let (x0, z0) = self.vertices[i];
            let (x1, z1) = self.vertices[(i + 1) % n];
            twice += x0 * z1 - x1 * z0;
        }
        (twice / 2.0).max(0.0)
    }
}

/// Ground-plane footprint of a box as a CCW 4-vertex polygon; the vertices
/// are the (x, z) of the bottom corners.
pub fn bev_polygon(b: &Box3D) -> ConvexPolygon2D {
    let c = corners(b);
    // Bottom corners reordered so the (x, z) loop winds counter-clockwise.
    ConvexPolygon2D::new([0, 3, 2, 1].into_iter().map(|i| (c[i].x, c[i].z)).collect())
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn line_intersection(a1: (f64, f64), a2: (f64, f64), b1: (f64, f64), b2: (f64, f64)) -> (f64, f64) {
    let da = (a2.0 - a1.0, a2.1 - a1.1);
    let db = (b2.0 - b1.0, b2.1 - b1.1);
    let denom = da.0 * db.1 - da.1 * db.0;
    let t = ((b1.0 - a1.0) * db.1 - (b1.1 - a1.1) * db.0) / denom;
    (a1.0 + t * da.0, a1.1 + t * da.1)
}

/// Sutherland-Hodgman intersection of two convex CCW polygons. The result is
/// convex and possibly empty.
pub fn polygon_intersection(a: &ConvexPolygon2D, b: &ConvexPolygon2D) -> ConvexPolygon2D {
    if a.is_empty() || b.is_empty() {
        return ConvexPolygon2D::new(Vec::new());
    }
    let mut output = a.vertices.clone();
    let nb = b.vertices.len();
    for i in 0..nb {
        if output.is_empty() {
            break;
        }
        let e1 = b.vertices[i];
        let e2 = b.vertices[(i + 1) % nb];
        let input = std::mem::take(&mut output);
        let n = input.len();
        for j in 0..n {
            let cur = input[j];
            let prev = input[(j + n - 1) % n];
            let cur_in = cross(e1, e2, cur) >= -EDGE_EPS;
            let prev_in = cross(e1, e2, prev) >= -EDGE_EPS;
            if cur_in {
                if !prev_in {
                    output.push(line_intersection(prev, cur, e1, e2));
                }
                output.push(cur);
            } else if prev_in {
                output.push(line_intersection(prev, cur, e1, e2));
            }
        }
    }
    ConvexPolygon2D::new(output)
}

fn box_order_key(b: &Box3D) -> [f64; 7] {
    [
        b.location.x,
        b.location.y,
        b.location.z,
        b.yaw,
        b.dims.height,
        b.dims.width,
        b.dims.length,
    ]
}

/// Rotated 3D IoU of two boxes sharing the vertical axis: BEV polygon
/// intersection area times y-interval overlap, over the union volume.
/// Returns 0 when the union has zero measure.
///
/// Exactly symmetric: the arguments are put in a canonical order before
/// clipping, so `iou_3d(a, b)` and `iou_3d(b, a)` run identical arithmetic.
pub fn iou_3d(a: &Box3D, b: &Box3D) -> f64 {
    let ka = box_order_key(a);
    let kb = box_order_key(b);
    let swap = ka
        .iter()
        .zip(&kb)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .is_some_and(|o| o.is_gt());
    let (a, b) = if swap { (b, a) } else { (a, b) };
    let (a_top, a_bottom) = a.y_interval();
    let (b_top, b_bottom) = b.y_interval();
    let y_overlap = (a_bottom.min(b_bottom) - a_top.max(b_top)).max(0.0);
    if y_overlap == 0.0 {
        return 0.0;
    }
    let inter_area = polygon_intersection(&bev_polygon(a), &bev_polygon(b)).area();
    let inter = inter_area * y_overlap;
    let union = a.volume() + b.volume() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

/// Render ground-truth and predicted footprints as a bird's-eye-view SVG.
/// Ground truth and predictions carry distinct stroke classes; the camera
/// sits at the origin marker, z grows upward in the image.
pub fn render_bev_svg(ground_truth: &[Box3D], predictions: &[Box3D]) -> String {
    const SCALE: f64 = 10.0; // px per meter
    const MARGIN: f64 = 3.0; // meters

    let mut min_x: f64 = -2.0;
    let mut max_x: f64 = 2.0;
    let mut min_z: f64 = 0.0;
    let mut max_z: f64 = 10.0;
    for b in ground_truth.iter().chain(predictions) {
        for (x, z) in bev_polygon(b).vertices {
            min_x = min_x.min(x);
            max_x = max_x.max(x);
            min_z = min_z.min(z);
            max_z = max_z.max(z);
        }
    }
    min_x -= MARGIN;
    max_x += MARGIN;
    min_z -= MARGIN;
    max_z += MARGIN;

    let width = (max_x - min_x) * SCALE;
    let height = (max_z - min_z) * SCALE;
    let px = |x: f64| (x - min_x) * SCALE;
    let pz = |z: f64| (max_z - z) * SCALE;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\">\n"
    ));
    svg.push_str(
        "  <style>.gt{fill:none;stroke:#2c7fb8;stroke-width:1.5}\
.pred{fill:none;stroke:#d7301f;stroke-width:1.5;stroke-dasharray:4 2}\
.cam{fill:#444}</style>\n",
    );
    svg.push_str(&format!(
        "  <rect width=\"{width:.0}\" height=\"{height:.0}\" fill=\"#fcfcfc\"/>\n"
    ));

    let polygon = |b: &Box3D, class: &str, out: &mut String| {
        let pts: Vec<String> = bev_polygon(b)
            .vertices
            .iter()
            .map(|&(x, z)| format!("{:.1},{:.1}", px(x), pz(z)))
            .collect();
        out.push_str(&format!(
            "  <polygon class=\"{class}\" points=\"{}\"/>\n",
            pts.join(" ")
        ));
        // Heading tick from the footprint center toward the box front.
        let (hx, hz) = rotate_y(b.dims.length / 2.0, 0.0, b.yaw);
        out.push_str(&format!(
            "  <line class=\"{class}\" x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\"/>\n",
            px(b.location.x),
            pz(b.location.z),
            px(b.location.x + hx),
            pz(b.location.z + hz),
        ));
    };
    for b in ground_truth {
        polygon(b, "gt", &mut svg);
    }
    for b in predictions {
        polygon(b, "pred", &mut svg);
    }

    // Camera marker at the origin.
    svg.push_str(&format!(
        "  <path class=\"cam\" d=\"M {:.1} {:.1} l -5 8 l 10 0 z\"/>\n",
        px(0.0),
        pz(0.0)
    ));
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    fn unit_cube_at(x: f64, y: f64, z: f64) -> Box3D {
        Box3D::new(
            Dimensions::new(1.0, 1.0, 1.0),
            CameraPoint::new(x, y, z),
            0.0,
        )
    }

    #[test]
    fn unit_cube_corners_are_axis_aligned() {
        let c = corners(&unit_cube_at(0.0, 0.0, 0.0));
        for p in &c {
            assert!((p.x.abs() - 0.5).abs() < 1e-12);
            assert!((p.z.abs() - 0.5).abs() < 1e-12);
            assert!(p.y == 0.0 || p.y == -1.0);
        }
        // Top corner k+4 sits directly above bottom corner k.
        for k in 0..4 {
            assert_eq!(c[k].x, c[k + 4].x);
            assert_eq!(c[k].z, c[k + 4].z);
        }
    }

    #[test]
    fn quarter_turn_swaps_length_and_width_extents() {
        let b = Box3D::new(
            Dimensions::new(1.0, 2.0, 4.0),
            CameraPoint::new(0.0, 0.0, 0.0),
            FRAC_PI_2,
        );
        let c = corners(&b);
        let max_x = c.iter().map(|p| p.x.abs()).fold(0.0, f64::max);
        let max_z = c.iter().map(|p| p.z.abs()).fold(0.0, f64::max);
        assert!((max_x - 1.0).abs() < 1e-12);
        assert!((max_z - 2.0).abs() < 1e-12);
    }

    #[test]
    fn corners_invariant_under_full_turn() {
        let a = Box3D::new(
            Dimensions::new(1.5, 1.6, 3.9),
            CameraPoint::new(2.0, 1.5, 17.0),
            0.4,
        );
        let b = Box3D::new(a.dims, a.location, 0.4 + TAU);
        let (ca, cb) = (corners(&a), corners(&b));
        for (p, q) in ca.iter().zip(cb.iter()) {
            assert!((p.x - q.x).abs() < 1e-9);
            assert!((p.z - q.z).abs() < 1e-9);
        }
    }

    #[test]
    fn bev_polygon_is_ccw_with_exact_area() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let b = Box3D::new(
                Dimensions::new(1.5, rng.random_range(0.5..3.0), rng.random_range(0.5..6.0)),
                CameraPoint::new(
                    rng.random_range(-20.0..20.0),
                    1.65,
                    rng.random_range(1.0..60.0),
                ),
                rng.random_range(-PI..PI),
            );
            let poly = bev_polygon(&b);
            assert_eq!(poly.vertices.len(), 4);
            assert!((poly.area() - b.dims.width * b.dims.length).abs() < 1e-9);
        }
    }

    #[test]
    fn bev_vertices_match_corner_footprint() {
        let b = Box3D::new(
            Dimensions::new(1.4, 1.7, 4.1),
            CameraPoint::new(-3.0, 1.65, 22.0),
            0.9,
        );
        let poly = bev_polygon(&b);
        let c = corners(&b);
        for (x, z) in &poly.vertices {
            assert!(c
                .iter()
                .any(|p| (p.x - x).abs() < 1e-12 && (p.z - z).abs() < 1e-12));
        }
    }

    #[test]
    fn identical_squares_clip_to_themselves() {
        let sq = ConvexPolygon2D::new(vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        let inter = polygon_intersection(&sq, &sq);
        assert!((inter.area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn offset_squares_clip_to_half() {
        let a = ConvexPolygon2D::new(vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        let b = ConvexPolygon2D::new(vec![(0.5, 0.0), (1.5, 0.0), (1.5, 1.0), (0.5, 1.0)]);
        assert!((polygon_intersection(&a, &b).area() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn disjoint_squares_clip_to_empty() {
        let a = ConvexPolygon2D::new(vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        let b = ConvexPolygon2D::new(vec![(5.0, 5.0), (6.0, 5.0), (6.0, 6.0), (5.0, 6.0)]);
        let inter = polygon_intersection(&a, &b);
        assert!(inter.is_empty());
        assert_eq!(inter.area(), 0.0);
    }

    #[test]
    fn identical_boxes_have_iou_one() {
        let b = Box3D::new(
            Dimensions::new(1.5, 1.7, 4.2),
            CameraPoint::new(1.0, 1.65, 20.0),
            0.3,
        );
        assert!((iou_3d(&b, &b) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shifted_unit_cubes_have_iou_one_third() {
        let a = unit_cube_at(0.0, 0.0, 5.0);
        let b = unit_cube_at(0.5, 0.0, 5.0);
        assert!((iou_3d(&a, &b) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_vertical_intervals_have_iou_zero() {
        let a = unit_cube_at(0.0, 0.0, 5.0);
        let b = unit_cube_at(0.0, -2.0, 5.0);
        assert_eq!(iou_3d(&a, &b), 0.0);
    }

    fn random_box(rng: &mut ChaCha8Rng) -> Box3D {
        Box3D::new(
            Dimensions::new(
                rng.random_range(0.8..2.2),
                rng.random_range(0.8..2.2),
                rng.random_range(2.0..5.0),
            ),
            CameraPoint::new(
                rng.random_range(-2.0..2.0),
                rng.random_range(1.0..2.3),
                rng.random_range(8.0..12.0),
            ),
            rng.random_range(-PI..PI),
        )
    }

    #[test]
    fn iou_is_symmetric_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..500 {
            let (a, b) = (random_box(&mut rng), random_box(&mut rng));
            let ab = iou_3d(&a, &b);
            let ba = iou_3d(&b, &a);
            assert_eq!(ab, ba);
            assert!((0.0..=1.0).contains(&ab));
        }
    }

    #[test]
    fn iou_invariant_under_ground_plane_rigid_motion() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let (a, b) = (random_box(&mut rng), random_box(&mut rng));
            let phi = rng.random_range(-PI..PI);
            let (tx, tz) = (rng.random_range(-9.0..9.0), rng.random_range(-9.0..9.0));
            let transform = |bx: &Box3D| {
                let (x, z) = rotate_y(bx.location.x, bx.location.z, phi);
                Box3D::new(
                    bx.dims,
                    CameraPoint::new(x + tx, bx.location.y, z + tz),
                    bx.yaw + phi,
                )
            };
            let before = iou_3d(&a, &b);
            let after = iou_3d(&transform(&a), &transform(&b));
            assert!((before - after).abs() < 1e-9, "{before} vs {after}");
        }
    }

    #[test]
    fn near_degenerate_boxes_stay_in_range() {
        let a = Box3D::new(
            Dimensions::new(1e-12, 1e-12, 1e-12),
            CameraPoint::new(0.0, 0.0, 5.0),
            0.0,
        );
        let b = unit_cube_at(0.0, 0.0, 5.0);
        let v = iou_3d(&a, &b);
        assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn svg_contains_both_stroke_classes() {
        let gt = unit_cube_at(0.0, 1.65, 10.0);
        let pred = unit_cube_at(0.3, 1.65, 10.2);
        let svg = render_bev_svg(&[gt], &[pred]);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("class=\"gt\""));
        assert!(svg.contains("class=\"pred\""));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
