//! Experiment runner for the bayesbench toolkit: named, seeded jobs that
//! write CSV tables, SVG plots and a manifest into an output directory.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod plot;
pub mod runner;

pub use config::{ExperimentName, Overrides};
pub use error::{CliError, Result};
pub use output::{OutputFile, Outputs};
pub use plot::{render_plot, PlotKind};
pub use runner::{run_experiment, RunManifest};
