//! `slk` command-line entry point: flag parsing and dispatch only; the
//! command logic lives in [`slk::cli`].

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use slk::cli::{self, RunConfig};
use slk::evaluator::InterpMode;
use slk::synth::{OracleNoise, SceneConfig};

#[derive(Parser)]
#[command(name = "slk", version, about = "KITTI-format 3D detection toolkit")]
struct Cli {
    /// Worker threads for parallel sections (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum InterpArg {
    #[value(name = "11")]
    Eleven,
    #[value(name = "40")]
    Forty,
}

impl From<InterpArg> for InterpMode {
    fn from(arg: InterpArg) -> Self {
        match arg {
            InterpArg::Eleven => InterpMode::Interp11,
            InterpArg::Forty => InterpMode::Interp40,
        }
    }
}

#[derive(Args)]
struct EvalArgs {
    /// Label directory (`label_2/NNNNNN.txt`).
    #[arg(long)]
    labels: PathBuf,
    /// Calibration directory or file; validated when given.
    #[arg(long)]
    calib: Option<PathBuf>,
    /// Prediction directory mirroring the label layout.
    #[arg(long)]
    preds: PathBuf,
    /// Object class to evaluate.
    #[arg(long, default_value = "Car")]
    class: String,
    /// 3D IoU threshold.
    #[arg(long, default_value_t = 0.7)]
    iou: f64,
    /// AP interpolation mode.
    #[arg(long, value_enum, default_value = "40")]
    interp: InterpArg,
    /// Output directory for result files.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl EvalArgs {
    fn run_config(&self, threads: Option<usize>) -> RunConfig {
        RunConfig {
            labels: self.labels.clone(),
            calib: self.calib.clone(),
            preds: self.preds.clone(),
            class: self.class.clone(),
            iou_threshold: self.iou,
            interp: self.interp.into(),
            bins: None,
            seed: 0,
            threads,
            out: self.out.clone(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse every file in the given trees and report problems.
    Validate {
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        calib: Option<PathBuf>,
        #[arg(long)]
        preds: Option<PathBuf>,
    },
    /// Evaluate predictions against labels at one IoU threshold.
    Eval(EvalArgs),
    /// Evaluate across IoU thresholds 0.00..1.00 and emit CSV curves.
    Sweep(EvalArgs),
    /// Generate a synthetic dataset tree with oracle predictions.
    Simulate {
        /// Number of frames to generate.
        #[arg(long, default_value_t = 100)]
        frames: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Probability the oracle picks the correct bin, per DOF.
        #[arg(long, default_value_t = 0.75)]
        p_hit: f64,
        /// Geometric decay of misclassification distance.
        #[arg(long, default_value_t = 0.5)]
        spread: f64,
        /// Region-center jitter in pixels.
        #[arg(long, default_value_t = 2.0)]
        jitter: f64,
        /// Score-profile softness (0 = one-hot).
        #[arg(long, default_value_t = 0.25)]
        softness: f64,
        /// Schedule config file overriding the defaults.
        #[arg(long)]
        bins: Option<PathBuf>,
        /// Output directory for the dataset tree.
        #[arg(long)]
        out: PathBuf,
    },
    /// Recover the translation of one label-format line from its 2D box.
    SolveTranslation {
        /// A 15-field label line; its location field is ignored.
        line: String,
        #[arg(long)]
        calib: PathBuf,
    },
    /// Print bin edges and centers for every DOF schedule.
    Bins {
        #[arg(long)]
        bins: Option<PathBuf>,
    },
    /// Render one frame's bird's-eye view as SVG.
    Bev {
        #[arg(long)]
        frame: String,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        preds: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn dispatch(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Validate {
            labels,
            calib,
            preds,
        } => {
            let report = cli::cmd_validate(&labels, calib.as_deref(), preds.as_deref())?;
            print!("{}", cli::render_validation_report(&report));
            Ok(if report.is_clean() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Eval(args) => {
            let config = args.run_config(cli.threads);
            let run = cli::cmd_eval(&config)?;
            print!("{}", cli::render_eval_report(&run, &config));
            if let Some(out) = &config.out {
                println!("result file: {}", out.join("result.txt").display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep(args) => {
            let config = args.run_config(cli.threads);
            let curves = cli::cmd_sweep(&config)?;
            for curve in &curves {
                let last = curve.points.iter().rev().find(|(_, ap)| *ap > 0.0);
                println!(
                    "{}: AP {:.4} at iou 0.00, first zero past iou {:.2}",
                    curve.difficulty.name(),
                    curve.points[0].1,
                    last.map_or(0.0, |(t, _)| *t),
                );
            }
            if let Some(out) = &config.out {
                println!("curves written under {}", out.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate {
            frames,
            seed,
            p_hit,
            spread,
            jitter,
            softness,
            bins,
            out,
        } => {
            let scene = SceneConfig {
                seed,
                ..SceneConfig::default()
            };
            let noise = OracleNoise::uniform(p_hit, spread, jitter, softness);
            let schedules = cli::load_schedules(bins.as_deref())?;
            let summary = cli::cmd_simulate(&scene, &noise, &schedules, frames, &out)?;
            println!(
                "wrote {} frames ({} objects) under {}",
                summary.frames,
                summary.objects,
                out.display()
            );
            println!("labels: {}", summary.label_dir.display());
            println!("calib:  {}", summary.calib_dir.display());
            println!("preds:  {}", summary.pred_dir.display());
            println!(
                "depth-error histogram: {}",
                summary.histogram_path.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::SolveTranslation { line, calib } => {
            let solution = cli::cmd_solve_translation(&line, &calib)?;
            print!("{}", cli::render_translation(&solution));
            Ok(ExitCode::SUCCESS)
        }
        Command::Bins { bins } => {
            print!("{}", cli::cmd_bins(bins.as_deref())?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Bev {
            frame,
            labels,
            preds,
            out,
        } => {
            let path = cli::cmd_bev(&frame, &labels, preds.as_deref(), &out)?;
            println!("{}", path.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = cli.threads.map(|n| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
    });
    let result = match &pool {
        Some(pool) => pool.install(|| dispatch(cli)),
        None => dispatch(cli),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
