//! Experiment front end: config files, multi-seed runs, CSV artifacts and
//! snapshot post-processing.

pub mod config;
pub mod runner;
pub mod value_map;

pub use config::{default_policy_for_env, load_experiment_config, ConfigOverrides, ExperimentConfig};
pub use runner::{run_experiment, run_seed, CurvePoint, SeedRun};
pub use value_map::export_value_map;
