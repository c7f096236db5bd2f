//! Experiment configuration, seeded orchestration and CSV/JSON output.

mod config;
mod emit;
mod landscape;
mod run;
pub mod stats;
pub mod verify;

pub use config::{AnsatzEntry, Experiment, ExperimentConfig};
pub use emit::{
    emit_bounds, emit_expressivity, emit_landscape, emit_runs, format_g, read_runs_json, write_bounds_csv,
    write_expressivity_csv, write_json, write_landscape_csv, write_runs_csv, Format, RUN_CSV_HEADER,
};
pub use landscape::{landscape_grid, LandscapeGrid};
pub use run::{run_experiment, run_experiment_sequential, run_expressivity, ExpressivityRecord, RunRecord};
pub use verify::{verify_bounds, BoundsCheck, BoundsReport};
