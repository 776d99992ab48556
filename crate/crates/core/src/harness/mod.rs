//! Experiment harness: seeded instances, Monte-Carlo sweeps, convergence
//! traces, the image experiment and the metrics they report.
//!
//! Each trial draws from its own ChaCha stream keyed by
//! `(master seed, ratio index, snr index, trial)`, so a sweep gives the same
//! numbers whether trials run in parallel or one after another.

pub mod check;
pub mod data;
pub mod image;
pub mod metrics;
pub mod sweep;

pub use check::{algebra_check, AlgebraCheck};
pub use data::{add_noise, gen_sensing, gen_signal, measure, trial_rng};
pub use image::{run_image_experiment, ImageMethod, ImageReport};
pub use metrics::psnr;
pub use sweep::{
    ambiguity_probe, convergence_trace, success_sweep, ConvergenceTrace, ExperimentConfig, ProbeRecord, SweepResult,
    TrialRecord,
};
