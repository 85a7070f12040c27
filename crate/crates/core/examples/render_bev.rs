//! Render a synthetic frame's ground truth and oracle predictions as a
//! bird's-eye-view SVG.
//!
//! Run with: `cargo run --example render_bev` (writes bev_example.svg)

use slk::box_geometry::{render_bev_svg, Box3D};
use slk::synth::{generate_dataset, predict_dataset, OracleNoise, PipelineArm, SceneConfig};

fn main() {
    let scene = SceneConfig {
        seed: 8,
        objects_per_frame: (4, 6),
        ..SceneConfig::default()
    };
    let dataset = generate_dataset(&scene, 1);
    let predictions = predict_dataset(&dataset, &OracleNoise::moderate(), &PipelineArm::default());

    let frame = dataset.frames.keys().next().unwrap().clone();
    let gt: Vec<Box3D> = dataset.frames[&frame].iter().map(|o| o.box3d()).collect();
    let pred: Vec<Box3D> = predictions.frames[&frame]
        .iter()
        .map(|d| d.object.box3d())
        .collect();

    let svg = render_bev_svg(&gt, &pred);
    std::fs::write("bev_example.svg", &svg).expect("writable working directory");
    println!(
        "wrote bev_example.svg ({} ground-truth boxes solid, {} predictions dashed)",
        gt.len(),
        pred.len()
    );
}
