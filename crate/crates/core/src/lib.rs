//! KITTI-format monocular 3D detection toolkit.
//!
//! The crate covers everything around a 3D detection network except the
//! network itself:
//!
//! - **kitti_io** – label / prediction / calibration file parsing and
//!   serialization.
//! - **camera** – pinhole projection, the two offset back-projection solvers,
//!   and observation-angle conversion.
//! - **bin_codec** – per-DOF bin schedules, one-hot encoding, and
//!   weighted-sum decoding.
//! - **box_geometry** – oriented boxes, convex clipping, rotated 3D IoU, and
//!   bird's-eye-view SVG rendering.
//! - **translation_solver** – least-squares translation recovery from a 2D
//!   box, dimensions, and yaw, with corner-configuration enumeration.
//! - **evaluator** – difficulty bucketing, greedy 3D-IoU matching,
//!   precision/recall, and interpolated average precision.
//! - **synth** – deterministic synthetic scenes and a noisy oracle predictor
//!   so the full pipeline runs end to end without a trained model.
//! - **cli** – the implementations behind the `slk` binary's subcommands.
//!
//! See the crate examples for a runnable walkthrough of each capability.

pub mod bin_codec;
pub mod box_geometry;
pub mod camera;
pub mod cli;
pub mod evaluator;
pub mod kitti_io;
pub mod synth;
pub mod translation_solver;
