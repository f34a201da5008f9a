use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use pfoco::acceptance;
use pfoco::alg1::{FeasibilityCheck, RunOptions};
use pfoco::harness::config::{AlgorithmId, DomainConfig, ExperimentConfig, ProblemConfig};
use pfoco::harness::output::{read_sweep_csv, write_cell};
use pfoco::harness::plot::plot_sweep;
use pfoco::harness::runner::{cells, run_cell, Cell};
use pfoco::harness::sweep::run_sweep;
use pfoco::problems::tape::RoundTape;
use pfoco::problems::MatrixCompletionInstance;

#[derive(Parser)]
#[command(name = "pfoco", version, about = "Projection-free online optimization with stochastic constraints")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one (algorithm, T, seed) cell: records CSV and summary JSON.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Pick the algorithm when the config lists several.
        #[arg(long, value_parser = parse_algorithm)]
        algorithm: Option<AlgorithmId>,
        /// Pick the horizon when the config lists several.
        #[arg(long = "T")]
        horizon: Option<usize>,
        /// Pick the seed when the config lists several.
        #[arg(long)]
        seed: Option<u64>,
        /// Also check every inner iterate, not only played points.
        #[arg(long)]
        check_all: bool,
    },
    /// Run the full T × seeds × algorithms grid and write sweep.csv.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Render regret and violation SVGs from a sweep.csv.
    Plot {
        #[arg(long)]
        input: PathBuf,
        /// Defaults to the directory holding the input.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Run the acceptance suite and print a pass/fail table.
    Verify,
    /// Record or inspect binary round tapes.
    Tape {
        #[command(subcommand)]
        command: TapeCommand,
    },
}

#[derive(Subcommand)]
enum TapeCommand {
    /// Record the rounds of a matrix-completion config.
    Export {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "T")]
        horizon: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Print a tape's header as JSON.
    Inspect { path: PathBuf },
}

fn parse_algorithm(s: &str) -> Result<AlgorithmId, String> {
    serde_json::from_value(serde_json::Value::String(s.into())).map_err(|_| format!("unknown algorithm {s:?}"))
}

/// Failures split by exit code: bad configs exit 2, everything else 1.
enum Failure {
    Config(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Runtime)?;
    ExperimentConfig::parse(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn select_cell(
    config: &ExperimentConfig,
    algorithm: Option<AlgorithmId>,
    horizon: Option<usize>,
    seed: Option<u64>,
) -> Result<Cell, Failure> {
    let matching: Vec<Cell> = cells(config)
        .into_iter()
        .filter(|c| algorithm.is_none_or(|a| a == c.algorithm))
        .filter(|c| horizon.is_none_or(|t| t == c.horizon))
        .filter(|c| seed.is_none_or(|s| s == c.seed))
        .collect();
    match matching.as_slice() {
        [cell] => Ok(*cell),
        [] => Err(Failure::Config("no cell of the config matches the selection".into())),
        many => Err(Failure::Config(format!(
            "{} cells match; narrow with --algorithm/--T/--seed or use `sweep`",
            many.len()
        ))),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run {
            config,
            algorithm,
            horizon,
            seed,
            check_all,
        } => {
            let config = load_config(&config)?;
            let cell = select_cell(&config, algorithm, horizon, seed)?;
            let options = RunOptions {
                feasibility: if check_all { FeasibilityCheck::All } else { FeasibilityCheck::Played },
                ..RunOptions::default()
            };
            let out = run_cell(&config, cell, &options).context("run failed")?;
            let (csv, json) = write_cell(&config.output_dir, &out).context("writing outputs")?;
            println!("{}", serde_json::to_string_pretty(&out.summary).context("summary")?);
            eprintln!("wrote {} and {}", csv.display(), json.display());
        }
        Command::Sweep { config } => {
            let config = load_config(&config)?;
            let report = run_sweep(&config, &RunOptions::default()).context("sweep failed")?;
            println!("{} runs, merged table at {}", report.summaries.len(), report.sweep_csv.display());
        }
        Command::Plot { input, output_dir } => {
            let rows = read_sweep_csv(&input).with_context(|| format!("reading {}", input.display()))?;
            let dir = output_dir.unwrap_or_else(|| input.parent().map(Path::to_path_buf).unwrap_or_default());
            for path in plot_sweep(&rows, &dir).context("plotting")? {
                println!("{}", path.display());
            }
        }
        Command::Verify => {
            let outcomes = acceptance::run_all();
            for o in &outcomes {
                println!("{o}");
            }
            let passed = outcomes.iter().filter(|o| o.passed).count();
            println!("{passed}/{} criteria passed", outcomes.len());
            if passed != outcomes.len() {
                return Err(Failure::Runtime(anyhow::anyhow!("acceptance suite failed")));
            }
        }
        Command::Tape { command } => tape(command)?,
    }
    Ok(())
}

fn tape(command: TapeCommand) -> Result<(), Failure> {
    match command {
        TapeCommand::Export {
            config,
            horizon,
            seed,
            output,
        } => {
            let config = load_config(&config)?;
            let (ProblemConfig::MatrixCompletion { m, n, b }, DomainConfig::NuclearBall { radius }) =
                (&config.problem, &config.domain)
            else {
                return Err(Failure::Config("tapes exist only for matrix_completion configs".into()));
            };
            let instance = MatrixCompletionInstance::generate(*m, *n, *radius, *b, seed).context("building instance")?;
            let tape = RoundTape::record(&instance, horizon);
            let file = File::create(&output).with_context(|| format!("creating {}", output.display()))?;
            tape.write_to(BufWriter::new(file)).context("writing tape")?;
            println!("wrote {horizon} rounds to {}", output.display());
        }
        TapeCommand::Inspect { path } => {
            let file = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
            let tape = RoundTape::read_from(BufReader::new(file)).context("reading tape")?;
            let header = serde_json::json!({
                "m": tape.rows,
                "n": tape.cols,
                "k": tape.radius,
                "b": tape.batch,
                "T": tape.horizon(),
                "seed": tape.seed,
            });
            println!("{}", serde_json::to_string_pretty(&header).context("header")?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
