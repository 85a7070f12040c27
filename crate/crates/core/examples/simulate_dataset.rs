//! Write a complete synthetic dataset tree to disk: `label_2/`, `calib/`,
//! and `preds/` per-frame files plus a depth-error histogram CSV. The tree
//! is interchangeable with a real dataset download.
//!
//! Run with: `cargo run --example simulate_dataset -- /tmp/slk-demo`

use slk::bin_codec::DofSchedules;
use slk::cli::{cmd_eval, cmd_simulate, render_eval_report, RunConfig};
use slk::synth::{OracleNoise, SceneConfig};

fn main() -> anyhow::Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "slk-demo-tree".to_string());
    let out = std::path::PathBuf::from(out);

    let scene = SceneConfig {
        seed: 2024,
        ..SceneConfig::default()
    };
    let summary = cmd_simulate(
        &scene,
        &OracleNoise::moderate(),
        &DofSchedules::default(),
        50,
        &out,
    )?;
    println!(
        "wrote {} frames / {} objects under {}",
        summary.frames,
        summary.objects,
        out.display()
    );

    // The written tree evaluates like any other dataset.
    let config = RunConfig {
        labels: summary.label_dir,
        calib: Some(summary.calib_dir),
        preds: summary.pred_dir,
        ..RunConfig::default()
    };
    let run = cmd_eval(&config)?;
    print!("{}", render_eval_report(&run, &config));
    Ok(())
}
