//! Simulation grids over scenarios, replications and estimators.

pub mod cell;
pub mod config;
pub mod figures;
pub mod grid;
pub mod store;

pub use cell::{run_cell, RunRecord};
pub use config::{EstimatorConfig, ExperimentConfig, PriorGrid, ValidateConfig, CONFIG_VERSION};
pub use figures::{figure_config, Scale, FIGURE_IDS};
pub use grid::{aggregate, run_grid, simulate_grid, CurvePoint, Gap, GridOutput};
pub use store::{read_curves_csv, read_records, run_experiment, write_curves_csv, RunOptions, RunSummary};
