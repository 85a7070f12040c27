//! Ablation harness: compare pipeline variants under identical scenes and
//! noise draws. Four classic comparisons: depth bin growth, bin-value
//! choice, location offsets, and orientation prediction.
//!
//! Run with: `cargo run --release --example schedule_ablation`

use slk::bin_codec::{BinSchedule, BinValue, DofSchedules};
use slk::evaluator::{Difficulty, EvalOptions};
use slk::synth::{
    compare_schedules, generate_dataset, OracleNoise, OrientationMode, PipelineArm, SceneConfig,
};

fn report(label: &str, a_name: &str, b_name: &str, dataset_seed: u64, arm_b: PipelineArm) {
    let scene = SceneConfig {
        seed: dataset_seed,
        depth_range: (7.0, 25.0),
        ..SceneConfig::default()
    };
    let dataset = generate_dataset(&scene, 250);
    let (a, b) = compare_schedules(
        &dataset,
        &OracleNoise::zero(),
        &PipelineArm::default(),
        &arm_b,
        &EvalOptions::default(),
    );
    let hard = Difficulty::Hard;
    println!("{label}:");
    println!(
        "  {a_name:<22} AP {:.4}   mean |depth err| {:.3} m   mean signed {:+.3} m",
        a.run.report(hard).ap,
        a.mean_abs_depth_error,
        a.mean_signed_depth_error
    );
    println!(
        "  {b_name:<22} AP {:.4}   mean |depth err| {:.3} m   mean signed {:+.3} m\n",
        b.run.report(hard).ap,
        b.mean_abs_depth_error,
        b.mean_signed_depth_error
    );
}

fn main() {
    report(
        "depth bins: linear growth vs constant 1 m",
        "linear growth",
        "uniform 1 m",
        10,
        PipelineArm {
            schedules: DofSchedules {
                depth: BinSchedule::uniform(0.0, 100, 1.0).unwrap(),
                ..DofSchedules::default()
            },
            ..PipelineArm::default()
        },
    );
    report(
        "bin value: center vs lower edge",
        "center",
        "lower edge",
        11,
        PipelineArm {
            bin_value: BinValue::LowerEdge,
            ..PipelineArm::default()
        },
    );
    report(
        "location: decoded dx/dy vs none",
        "with offsets",
        "offsets zeroed",
        12,
        PipelineArm {
            use_offsets: false,
            ..PipelineArm::default()
        },
    );
    report(
        "orientation: predicted vs fixed 0",
        "predicted",
        "fixed yaw 0",
        13,
        PipelineArm {
            orientation: OrientationMode::Fixed(0.0),
            ..PipelineArm::default()
        },
    );
}
