//! Parse KITTI label, prediction, and calibration text, then serialize back.
//!
//! Run with: `cargo run --example parse_kitti`

use slk::kitti_io::{
    parse_calib_file, parse_label_file, parse_prediction_file, serialize_labels,
    validate_detections,
};

fn main() {
    let labels = "\
Car 0.00 0 -1.58 587.01 173.33 614.12 200.12 1.65 1.67 3.64 -0.65 1.71 46.70 -1.59
Pedestrian 0.10 1 0.42 100.50 120.00 140.25 260.75 1.78 0.60 0.90 -5.20 1.60 12.30 0.50
DontCare -1.00 -1 -10.00 503.89 169.71 590.61 190.13 -1.00 -1.00 -1.00 -1000.00 -1000.00 -1000.00 -10.00
";
    let objects = parse_label_file(labels).expect("well-formed labels");
    for o in &objects {
        println!(
            "{:<12} z = {:>8.2} m   2D box {:>6.1} x {:<6.1} px   dont-care: {}",
            o.class_name,
            o.location.z,
            o.box2d.width(),
            o.box2d.height(),
            o.is_dont_care()
        );
    }

    // Round trip is the identity on normalized lines.
    assert_eq!(serialize_labels(&objects), labels);
    println!("\nserialize(parse(labels)) reproduced the input byte-for-byte");

    // Predictions carry a trailing score; out-of-range scores are kept but
    // flagged by the validator.
    let preds =
        "Car 0.00 0 -1.58 587.01 173.33 614.12 200.12 1.65 1.67 3.64 -0.65 1.71 46.70 -1.59 1.50\n";
    let detections = parse_prediction_file(preds).expect("well-formed predictions");
    for finding in validate_detections(&detections) {
        println!("validator: {finding}");
    }

    let calib = parse_calib_file("P2: 700 0 600 0 0 700 180 0 0 0 1 0\n").expect("P2 present");
    let k = &calib.projection;
    println!(
        "calibration: focal ({}, {}) px, principal point ({}, {})",
        k.alpha_x, k.alpha_y, k.u0, k.v0
    );

    // Malformed lines come back as structured errors with line numbers.
    let err = parse_label_file("Car 1 2 3\n").unwrap_err();
    println!("malformed input -> {err}");
}
