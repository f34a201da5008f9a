//! Experiment orchestration: configs, cell runs, sweeps, CSV and SVG output.

pub mod config;
pub mod output;
pub mod plot;
pub mod runner;
pub mod sweep;

pub use config::{AlgorithmId, ExperimentConfig, OracleId, ProblemConfig};
pub use output::{records_csv, SweepRow};
pub use runner::{run_cell, Cell, CellOutput, RunSummary};
pub use sweep::{run_cells, run_sweep};
