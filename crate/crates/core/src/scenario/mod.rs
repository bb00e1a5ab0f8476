//! Scenario configuration, execution and export.

pub mod config;
mod plot;
pub mod run;
pub mod sweep;
pub mod verify;

pub use config::{preset_names, ModelName, ScenarioConfig};
pub use plot::{line_plot, Series};
pub use run::{run_scenario, write_artifacts, RunOutcome, RunSummary};
pub use sweep::{sweep, SweepRecord};
pub use verify::{verify, VerifyReport};
