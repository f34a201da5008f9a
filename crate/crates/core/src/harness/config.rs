//! Experiment configuration: one JSON document describing the problem,
//! domain, algorithm(s), horizons and seeds. Algorithm parameters (θ, μ, K,
//! δ) are always derived, never configured.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pdmfw::Alg2Options;
use crate::problems::ConstraintFamily;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemConfig {
    MatrixCompletion {
        m: usize,
        n: usize,
        b: usize,
    },
    StochasticQuadratic {
        dim: usize,
        center_noise: f64,
        constraint: ConstraintFamily,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainConfig {
    NuclearBall { radius: f64 },
    Box { lo: f64, hi: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmId {
    /// Blocked primal-dual framework with an online oracle.
    Alg1,
    /// Primal-Dual Meta-Frank-Wolfe.
    Pdmfw,
}

impl AlgorithmId {
    pub fn as_str(self) -> &'static str {
        match self {
            AlgorithmId::Alg1 => "alg1",
            AlgorithmId::Pdmfw => "pdmfw",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleId {
    #[default]
    Ocg,
}

/// A scalar or a list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    #[serde(default = "default_benchmark_iters")]
    pub iters: usize,
    #[serde(default = "default_gap_tol")]
    pub gap_tol: f64,
    #[serde(default = "default_constraint_tol")]
    pub constraint_tol: f64,
}

fn default_benchmark_iters() -> usize {
    1000
}

fn default_gap_tol() -> f64 {
    1e-6
}

fn default_constraint_tol() -> f64 {
    1e-4
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            iters: default_benchmark_iters(),
            gap_tol: default_gap_tol(),
            constraint_tol: default_constraint_tol(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    pub domain: DomainConfig,
    pub algorithm: OneOrMany<AlgorithmId>,
    #[serde(default)]
    pub oracle: OracleId,
    #[serde(rename = "T")]
    pub horizon: OneOrMany<usize>,
    pub beta: f64,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tape_path: Option<PathBuf>,
    #[serde(default)]
    pub pdmfw: Alg2Options,
    #[serde(default)]
    pub benchmark: BenchmarkConfig,
}

/// A configuration error with the 1-based line it refers to, when known.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

impl ExperimentConfig {
    /// Parses and validates a JSON config, reporting the offending line.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| ConfigError {
            line: Some(e.line()),
            message: e.to_string(),
        })?;
        config.validate().map_err(|(key, message)| ConfigError {
            line: line_of_key(text, key),
            message,
        })?;
        Ok(config)
    }

    pub fn algorithms(&self) -> Vec<AlgorithmId> {
        self.algorithm.to_vec()
    }

    pub fn horizons(&self) -> Vec<usize> {
        self.horizon.to_vec()
    }

    fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        match (&self.problem, &self.domain) {
            (ProblemConfig::MatrixCompletion { m, n, b }, DomainConfig::NuclearBall { radius }) => {
                if *m == 0 || *n == 0 || *b == 0 || b > &(m * n) {
                    return Err(("problem", format!("need m, n >= 1 and 1 <= b <= m*n, got m={m} n={n} b={b}")));
                }
                if radius.is_nan() || *radius < 1.0 {
                    return Err(("domain", format!("nuclear-ball radius must be >= 1, got {radius}")));
                }
            }
            (ProblemConfig::StochasticQuadratic { dim, center_noise, .. }, DomainConfig::Box { lo, hi }) => {
                if *dim == 0 || !(center_noise.is_finite() && *center_noise >= 0.0) {
                    return Err(("problem", "need dim >= 1 and center_noise >= 0".into()));
                }
                if lo.is_nan() || hi.is_nan() || lo >= hi {
                    return Err(("domain", format!("box needs lo < hi, got [{lo}, {hi}]")));
                }
            }
            (ProblemConfig::MatrixCompletion { .. }, _) => {
                return Err(("domain", "matrix_completion requires a nuclear_ball domain".into()))
            }
            (ProblemConfig::StochasticQuadratic { .. }, _) => {
                return Err(("domain", "stochastic_quadratic requires a box domain".into()))
            }
        }
        if self.tape_path.is_some() && !matches!(self.problem, ProblemConfig::MatrixCompletion { .. }) {
            return Err(("tape_path", "round tapes exist only for matrix_completion".into()));
        }
        if self.algorithms().is_empty() {
            return Err(("algorithm", "at least one algorithm is required".into()));
        }
        let horizons = self.horizons();
        if horizons.is_empty() || horizons.iter().any(|&t| t < 4) {
            return Err(("T", "horizons must be non-empty and each >= 4".into()));
        }
        if self.seeds.is_empty() {
            return Err(("seeds", "at least one seed is required".into()));
        }
        if !self.beta.is_finite() {
            return Err(("beta", "beta must be finite".into()));
        }
        if self.benchmark.iters == 0 {
            return Err(("benchmark", "benchmark iters must be >= 1".into()));
        }
        Ok(())
    }
}

fn line_of_key(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
}

pub fn load(path: &std::path::Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    ExperimentConfig::parse(&text).map_err(|e| Error::Config(e.to_string()))
}
