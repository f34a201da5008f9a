//! Parallel execution of a cell grid.

use std::path::PathBuf;

use log::info;
use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::output::{write_cell, write_sweep_csv, SweepRow};
use super::runner::{cells, run_cell, Cell, CellOutput, RunSummary};
use crate::alg1::RunOptions;
use crate::error::{Error, Result};

pub const THREADS_ENV: &str = "PFOCO_THREADS";

/// Pool size from `PFOCO_THREADS`, or `None` for rayon's default.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(None),
    }
}

fn pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

/// Runs `cells` in parallel. Output order matches input order.
pub fn run_cells(config: &ExperimentConfig, cells: &[Cell], options: &RunOptions) -> Result<Vec<CellOutput>> {
    pool()?.install(|| {
        cells
            .par_iter()
            .map(|&cell| {
                let out = run_cell(config, cell, options)?;
                info!(
                    "{}: regret {:.4} violation {:.4} ({:.2}s)",
                    cell.stem(),
                    out.summary.regret,
                    out.summary.violation,
                    out.summary.wall_time_secs
                );
                Ok(out)
            })
            .collect()
    })
}

pub struct SweepReport {
    pub summaries: Vec<RunSummary>,
    pub sweep_csv: PathBuf,
}

/// Runs the whole grid, writing per-cell files and then the merged
/// `sweep.csv` into the config's output directory.
pub fn run_sweep(config: &ExperimentConfig, options: &RunOptions) -> Result<SweepReport> {
    let grid = cells(config);
    let dir = &config.output_dir;
    std::fs::create_dir_all(dir)?;
    let summaries: Vec<RunSummary> = pool()?.install(|| {
        grid.par_iter()
            .map(|&cell| {
                let out = run_cell(config, cell, options)?;
                write_cell(dir, &out)?;
                info!("{} done in {:.2}s", cell.stem(), out.summary.wall_time_secs);
                Ok(out.summary)
            })
            .collect::<Result<_>>()
    })?;
    let rows: Vec<SweepRow> = summaries.iter().map(SweepRow::from).collect();
    let sweep_csv = dir.join("sweep.csv");
    write_sweep_csv(&sweep_csv, &rows)?;
    Ok(SweepReport { summaries, sweep_csv })
}
