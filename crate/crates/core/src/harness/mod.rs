//! Synthetic instances, scaled competitive ratios, the two sweep
//! experiments, and the command-line front end.

pub mod cli;
pub mod experiments;
pub mod metrics;
pub mod plot;
pub mod synthetic;

pub use experiments::{run_experiment_dynamic, run_experiment_replacement, ExperimentConfig, SweepTable};
pub use metrics::{ratio_after_scaling, ratio_with, scale_to_feasible, scale_with, ScaleMode};
pub use synthetic::{gen_synthetic, gen_synthetic_matrix, SyntheticMatrix};
