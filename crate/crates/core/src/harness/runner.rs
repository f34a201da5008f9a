//! One (algorithm, T, seed) cell: instance, run, benchmark and summary.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use super::config::{AlgorithmId, DomainConfig, ExperimentConfig, OracleId, ProblemConfig};
use crate::alg1::{derive_params_alg1, run_alg1, RunOptions};
use crate::error::{Error, Result};
use crate::functions::RoundFunctions;
use crate::metrics::{regret_curve, RunLog};
use crate::oracle::{Ocg, OracleFactory};
use crate::pdmfw::{derive_params_alg2, run_pdmfw};
use crate::problems::tape::RoundTape;
use crate::problems::{
    benchmark_solve, BenchmarkOptions, BenchmarkSolution, MatrixCompletionInstance, OnlineProblem,
    StochasticQuadraticInstance,
};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Cell {
    pub algorithm: AlgorithmId,
    pub horizon: usize,
    pub seed: u64,
}

impl Cell {
    /// Stem used for per-cell output files.
    pub fn stem(&self) -> String {
        format!("{}_T{}_seed{}", self.algorithm.as_str(), self.horizon, self.seed)
    }

    /// Seed of the algorithm's own randomness, keyed by the whole cell.
    pub fn algorithm_seed(&self) -> u64 {
        rng::derive_seed(self.seed, &format!("{}/{}", self.algorithm.as_str(), self.horizon))
    }
}

/// Every cell of the config grid, ordered by algorithm, then T, then seed.
pub fn cells(config: &ExperimentConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for algorithm in config.algorithms() {
        for horizon in config.horizons() {
            for &seed in &config.seeds {
                out.push(Cell {
                    algorithm,
                    horizon,
                    seed,
                });
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub algorithm: AlgorithmId,
    pub oracle: Option<OracleId>,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub beta: f64,
    pub seed: u64,
    pub regret: f64,
    pub violation: f64,
    pub cumulative_violation: f64,
    pub lambda_sq_sum: f64,
    pub benchmark_objective: f64,
    pub benchmark_gap: f64,
    pub benchmark_converged: bool,
    pub feasibility_checks: usize,
    pub wall_time_secs: f64,
    pub params: serde_json::Value,
}

#[derive(Clone, Debug)]
pub struct CellOutput {
    pub cell: Cell,
    pub log: RunLog,
    pub benchmark: BenchmarkSolution,
    pub summary: RunSummary,
}

/// Builds the problem instance for `seed`, or replays the configured tape.
pub fn build_problem(config: &ExperimentConfig, seed: u64) -> Result<Box<dyn OnlineProblem>> {
    if let Some(path) = &config.tape_path {
        return Ok(Box::new(load_tape(path)?.instance()?));
    }
    match (&config.problem, &config.domain) {
        (ProblemConfig::MatrixCompletion { m, n, b }, DomainConfig::NuclearBall { radius }) => {
            Ok(Box::new(MatrixCompletionInstance::generate(*m, *n, *radius, *b, seed)?))
        }
        (
            ProblemConfig::StochasticQuadratic {
                dim,
                center_noise,
                constraint,
            },
            DomainConfig::Box { lo, hi },
        ) => Ok(Box::new(StochasticQuadraticInstance::generate(
            *dim,
            *lo,
            *hi,
            *center_noise,
            constraint.clone(),
            seed,
        )?)),
        _ => Err(Error::Config("problem and domain kinds do not match".into())),
    }
}

pub fn load_tape(path: &Path) -> Result<RoundTape> {
    RoundTape::read_from(BufReader::new(File::open(path)?))
}

/// The first `horizon` rounds, from the tape when one is configured.
fn realized_rounds(config: &ExperimentConfig, problem: &dyn OnlineProblem, horizon: usize) -> Result<Vec<RoundFunctions>> {
    match &config.tape_path {
        Some(path) => {
            let tape = load_tape(path)?;
            if tape.horizon() < horizon {
                return Err(Error::StreamTooShort {
                    expected: horizon,
                    got: tape.horizon(),
                });
            }
            let mut rounds = tape.rounds()?;
            rounds.truncate(horizon);
            Ok(rounds)
        }
        None => Ok(problem.rounds(horizon)),
    }
}

fn oracle_factory(id: OracleId) -> &'static dyn OracleFactory {
    match id {
        OracleId::Ocg => &Ocg,
    }
}

/// Runs one cell end to end.
pub fn run_cell(config: &ExperimentConfig, cell: Cell, options: &RunOptions) -> Result<CellOutput> {
    let started = Instant::now();
    let problem = build_problem(config, cell.seed)?;
    let rounds = realized_rounds(config, problem.as_ref(), cell.horizon)?;
    let domain = problem.domain();
    let bounds = problem.bounds();
    let x1 = problem.initial_point();
    let alg_seed = cell.algorithm_seed();

    let (log, oracle) = match cell.algorithm {
        AlgorithmId::Alg1 => {
            let factory = oracle_factory(config.oracle);
            let params = derive_params_alg1(cell.horizon, &factory.meta(&bounds), &bounds, config.beta)?;
            let log = run_alg1(rounds.iter().cloned(), domain, &bounds, &params, factory, x1.clone(), alg_seed, options)?;
            (log, Some(config.oracle))
        }
        AlgorithmId::Pdmfw => {
            let params = derive_params_alg2(cell.horizon, &bounds, config.beta)?;
            let log = run_pdmfw(
                rounds.iter().cloned(),
                domain,
                &bounds,
                &params,
                &config.pdmfw,
                x1.clone(),
                alg_seed,
                options,
            )?;
            (log, None)
        }
    };

    let bench_opts = BenchmarkOptions {
        iters: config.benchmark.iters,
        gap_tol: config.benchmark.gap_tol,
        constraint_tol: config.benchmark.constraint_tol,
        seed: rng::derive_seed(cell.seed, &format!("benchmark/{}", cell.horizon)),
    };
    let benchmark = benchmark_solve(&rounds, &problem.mean_constraint(), domain, x1, &bench_opts)?;
    let regret = regret_curve(&log.records, &benchmark.x_star, &rounds)?
        .last()
        .copied()
        .unwrap_or(0.0);

    let summary = RunSummary {
        algorithm: cell.algorithm,
        oracle,
        horizon: cell.horizon,
        beta: config.beta,
        seed: cell.seed,
        regret,
        violation: log.violation(),
        cumulative_violation: log.cumulative_violation(),
        lambda_sq_sum: log.lambda_sq_sum,
        benchmark_objective: benchmark.objective,
        benchmark_gap: benchmark.gap,
        benchmark_converged: benchmark.converged,
        feasibility_checks: log.feasibility_checks,
        wall_time_secs: started.elapsed().as_secs_f64(),
        params: log.params.clone(),
    };
    Ok(CellOutput {
        cell,
        log,
        benchmark,
        summary,
    })
}
