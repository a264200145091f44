//! Seeded experiment harness for shot-frugal optimization.
//!
//! Each experiment runs an ensemble of trials per variant, writes one CSV
//! per variant plus a `manifest.json` holding the resolved configuration,
//! and can be plotted to SVG with [`plot::emit_plot`].

pub mod bounds;
pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod plot;
pub mod table;

pub use config::{Experiment, Overrides, RawConfig, ResolvedConfig};
pub use error::{HarnessError, Result};
pub use experiments::{run_experiment, write_outputs, ExperimentOutput};
