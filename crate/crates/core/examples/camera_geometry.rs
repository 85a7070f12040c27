//! Pinhole projection, the two offset back-projection solvers, and the
//! global-yaw / observation-angle conversion.
//!
//! Run with: `cargo run --example camera_geometry`

use slk::camera::{
    alpha_to_ry, project, ry_to_alpha, solve_xy_from_camera_offset, solve_xy_from_image_offset,
    CameraIntrinsics, CameraPoint,
};

fn main() {
    let k = CameraIntrinsics::new(721.5377, 721.5377, 609.5593, 172.854).unwrap();
    let p = CameraPoint::new(2.0, 1.2, 25.0);
    let img = project(p, &k).unwrap();
    println!(
        "({}, {}, {}) m projects to ({:.2}, {:.2}) px",
        p.x, p.y, p.z, img.u, img.v
    );

    // Image-space offsets: a region center plus (du, dv) to the projected
    // object center recovers (x, y) given depth.
    let (u, v) = (img.u - 6.0, img.v + 3.5); // pretend the 2D detector was off
    let (du, dv) = (img.u - u, img.v - v);
    let (x, y) = solve_xy_from_image_offset(u, v, du, dv, p.z, &k).unwrap();
    println!("image-offset solver:  x = {x:.6}, y = {y:.6}");

    // Camera-space offsets: back-project the region center to depth z, then
    // subtract the (dx, dy) gap to the object center.
    let dx = p.z * (u - k.u0) / k.alpha_x - p.x;
    let dy = p.z * (v - k.v0) / k.alpha_y - p.y;
    let (x, y) = solve_xy_from_camera_offset(u, v, dx, dy, p.z, &k).unwrap();
    println!("camera-offset solver: x = {x:.6}, y = {y:.6}");

    // Observation angle: yaw measured against the viewing ray instead of the
    // camera axis. A car driving straight appears to rotate as it moves
    // sideways through the image; alpha removes that apparent rotation.
    let yaw = 0.0;
    for x in [-10.0, 0.0, 10.0] {
        let alpha = ry_to_alpha(yaw, x, 20.0).unwrap();
        let back = alpha_to_ry(alpha, x, 20.0).unwrap();
        println!("yaw {yaw:+.2} at x = {x:+5.1}: alpha = {alpha:+.4} rad (back to yaw {back:+.2})");
    }
}
