//! Oriented boxes: corners, bird's-eye-view footprints, convex clipping, and
//! rotated 3D IoU.
//!
//! Run with: `cargo run --example rotated_iou`

use slk::box_geometry::{bev_polygon, corners, iou_3d, polygon_intersection, Box3D, Dimensions};
use slk::camera::CameraPoint;

fn main() {
    let car = Box3D::new(
        Dimensions::new(1.5, 1.7, 4.2),
        CameraPoint::new(1.0, 1.65, 20.0),
        0.3,
    );
    println!(
        "corners of a {:.1} x {:.1} x {:.1} m box:",
        car.dims.height, car.dims.width, car.dims.length
    );
    for (i, c) in corners(&car).iter().enumerate() {
        println!("  {i}: ({:+.3}, {:+.3}, {:+.3})", c.x, c.y, c.z);
    }

    let footprint = bev_polygon(&car);
    println!(
        "footprint area {:.3} m^2 (width * length = {:.3})",
        footprint.area(),
        car.dims.width * car.dims.length
    );

    // Slide a second box across the first and watch the overlap decay.
    println!("\n3D IoU under lateral offset:");
    for step in 0..6 {
        let offset = step as f64 * 0.4;
        let other = Box3D::new(
            car.dims,
            CameraPoint::new(car.location.x + offset, car.location.y, car.location.z),
            car.yaw,
        );
        let inter = polygon_intersection(&footprint, &bev_polygon(&other));
        println!(
            "  offset {offset:.1} m: BEV intersection {:.3} m^2, IoU {:.4}",
            inter.area(),
            iou_3d(&car, &other)
        );
    }

    // Rotation alone also erodes the overlap.
    println!("\n3D IoU under yaw difference:");
    for step in 0..5 {
        let dyaw = step as f64 * 0.3;
        let other = Box3D::new(car.dims, car.location, car.yaw + dyaw);
        println!("  yaw diff {dyaw:.1} rad: IoU {:.4}", iou_3d(&car, &other));
    }
}
