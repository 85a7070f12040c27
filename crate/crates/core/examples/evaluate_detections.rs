//! End-to-end benchmark run without a trained network: generate synthetic
//! scenes, predict them with the noisy oracle, and evaluate AP per
//! difficulty, including an IoU threshold sweep.
//!
//! Run with: `cargo run --release --example evaluate_detections`

use slk::evaluator::{evaluate, sweep_iou, EvalOptions};
use slk::synth::{generate_dataset, predict_dataset, OracleNoise, PipelineArm, SceneConfig};

fn main() {
    let scene = SceneConfig {
        seed: 1,
        ..SceneConfig::default()
    };
    let dataset = generate_dataset(&scene, 300);
    let n_objects: usize = dataset.frames.values().map(Vec::len).sum();
    println!(
        "generated {} frames, {} objects",
        dataset.frames.len(),
        n_objects
    );

    for (label, noise) in [
        ("zero noise (quantization only)", OracleNoise::zero()),
        ("moderate noise", OracleNoise::moderate()),
        ("heavy noise", OracleNoise::uniform(0.5, 0.6, 4.0, 0.3)),
    ] {
        let predictions = predict_dataset(&dataset, &noise, &PipelineArm::default());
        let run = evaluate(
            &dataset.frames,
            &predictions.frames,
            &EvalOptions::default(),
        )
        .unwrap();
        println!("\n{label}:");
        for r in &run.reports {
            println!(
                "  {:<9} AP11 {:.4}  AP40 {:.4}  (TP {:>4}  FP {:>4}  FN {:>4})",
                r.difficulty.name(),
                r.ap11,
                r.ap40,
                r.true_positives,
                r.false_positives,
                r.false_negatives
            );
        }
    }

    // AP as a function of the IoU threshold, a coarse sweep.
    let predictions = predict_dataset(&dataset, &OracleNoise::moderate(), &PipelineArm::default());
    let thresholds: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let curves = sweep_iou(
        &dataset.frames,
        &predictions.frames,
        &EvalOptions::default(),
        &thresholds,
    )
    .unwrap();
    println!("\nAP vs IoU threshold (moderate noise):");
    print!("  iou:     ");
    for t in &thresholds {
        print!(" {t:>5.1}");
    }
    println!();
    for curve in &curves {
        print!("  {:<9}", curve.difficulty.name());
        for (_, ap) in &curve.points {
            print!(" {ap:>5.2}");
        }
        println!();
    }
}
