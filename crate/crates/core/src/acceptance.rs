//! The acceptance suite: nine pass/fail checks covering oracle correctness,
//! the FTPL and step-size bounds, parameter derivations, dual-update
//! exactness, regret growth on both testbeds, feasibility and determinism.

use std::fmt;
use std::time::{Duration, Instant};

use rand::Rng;

use crate::alg1::{block_dual_update, derive_params_alg1, FeasibilityCheck, RunOptions};
use crate::audit::{best_box_vertex, jacobi_singular_values, step_product};
use crate::domains::DomainSpec;
use crate::error::{Error, Result};
use crate::ftpl::{FtplState, HistoryIndex};
use crate::functions::{ProblemBounds, Smoothness};
use crate::harness::config::{
    AlgorithmId, BenchmarkConfig, DomainConfig, ExperimentConfig, OneOrMany, OracleId, ProblemConfig,
};
use crate::harness::output::records_csv;
use crate::harness::runner::{cells, Cell, CellOutput};
use crate::harness::sweep::run_cells;
use crate::metrics::{mean_and_stderr, slope_fit, slope_fit_magnitude};
use crate::oracle::OracleMeta;
use crate::pdmfw::{derive_params_alg2, dual_update};
use crate::point::Point;
use crate::problems::ConstraintFamily;
use crate::rng;

const MASTER_SEED: u64 = 20_240_601;
const FEASIBILITY_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {} {:<28} {:>8.2}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

fn timed(id: u8, name: &'static str, limit: Duration, check: impl FnOnce() -> Result<(bool, String)>) -> Outcome {
    let start = Instant::now();
    let result = check();
    let elapsed = start.elapsed();
    let (mut passed, mut detail) = match result {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    if elapsed > limit {
        passed = false;
        detail.push_str(&format!("; over the {}s budget", limit.as_secs()));
    }
    Outcome {
        id,
        name,
        passed,
        detail,
        elapsed,
    }
}

/// Nuclear-ball LMO against an independent SVD, and box/ℓ1/simplex LMOs
/// against random feasible points.
pub fn lmo_correctness() -> Outcome {
    timed(1, "lmo correctness", Duration::from_secs(10), || {
        let mut rng = rng::stream(MASTER_SEED, "accept-lmo");
        let radius = 2.0;
        let nuclear = DomainSpec::nuclear_ball(8, 8, radius)?;
        let mut worst_rel = 0.0_f64;
        for _ in 0..100 {
            let w: Vec<f64> = (0..64).map(|_| rng.random_range(-1.0..1.0)).collect();
            let sigma = jacobi_singular_values(&w, 8, 8)[0];
            let wp = Point::matrix(8, 8, w)?;
            let v = nuclear.lmo(&wp, &mut rng)?;
            let expected = -radius * sigma;
            worst_rel = worst_rel.max((wp.dot(&v) - expected).abs() / expected.abs());
        }

        let vector_domains = [
            DomainSpec::cube(8, -1.0, 2.0)?,
            DomainSpec::l1_ball(8, 1.5)?,
            DomainSpec::simplex(8)?,
        ];
        let mut beaten = 0usize;
        for domain in &vector_domains {
            for _ in 0..20 {
                let w = Point::new((0..8).map(|_| rng.random_range(-1.0..1.0)).collect())?;
                let best = w.dot(&domain.lmo(&w, &mut rng)?);
                for _ in 0..1000 {
                    if w.dot(&domain.sample(&mut rng)) < best - 1e-12 {
                        beaten += 1;
                    }
                }
            }
        }
        Ok((
            worst_rel <= 1e-6 && beaten == 0,
            format!("nuclear worst relative error {worst_rel:.2e} (<= 1e-6); random points beating the LMO: {beaten}"),
        ))
    })
}

/// Mean realized FTPL regret on `[0,1]^4` against `R/δ + δ·d·R·Σ‖w_t‖∞²`.
pub fn ftpl_bound() -> Outcome {
    timed(2, "ftpl regret bound", Duration::from_secs(30), || {
        let (d, horizon, draws) = (4usize, 1024usize, 200u64);
        let domain = DomainSpec::cube(d, 0.0, 1.0)?;
        let diameter = domain.diameter();
        let delta = 1.0 / (2.0 * (d as f64).sqrt() * (horizon as f64).sqrt());

        // Oblivious adversary: each coordinate flips sign every round from a
        // random phase, which punishes following the leader.
        let mut adv = rng::stream(MASTER_SEED, "accept-ftpl-adversary");
        let phase: Vec<f64> = (0..d).map(|_| if adv.random::<bool>() { 1.0 } else { -1.0 }).collect();
        let losses: Vec<Point> = (0..horizon)
            .map(|t| {
                let s = if t % 2 == 0 { 1.0 } else { -1.0 };
                Point::new(phase.iter().map(|p| p * s).collect())
            })
            .collect::<Result<_>>()?;
        let mut coef_sum = vec![0.0; d];
        for w in &losses {
            for (c, v) in coef_sum.iter_mut().zip(w.as_slice()) {
                *c += v;
            }
        }
        let (_, best) = best_box_vertex(&coef_sum);
        let sq_sum: f64 = losses.iter().map(|w| w.norm_inf().powi(2)).sum();
        let bound = diameter / delta + delta * d as f64 * diameter * sq_sum;

        let mut total = 0.0;
        for draw in 0..draws {
            let mut learner = FtplState::new(
                domain.clone(),
                delta,
                HistoryIndex::Full,
                rng::child(MASTER_SEED, "accept-ftpl", draw),
            )?;
            let mut played = 0.0;
            for w in &losses {
                let x = learner.select()?;
                played += w.dot(&x);
                learner.observe(w.clone())?;
            }
            total += played - best;
        }
        let mean = total / draws as f64;
        Ok((
            mean <= bound,
            format!("mean regret {mean:.2} over {draws} draws, bound {bound:.2}"),
        ))
    })
}

/// `∏_{k=ℓ}^{K}(1 − γ_k) ≤ ((ℓ+1)/(K+2))²` for all `ℓ ≤ K ≤ 200`.
pub fn step_product_lemma() -> Outcome {
    timed(3, "step-size product lemma", Duration::from_secs(1), || {
        let mut violations = 0usize;
        let mut worst = f64::NEG_INFINITY;
        for k_max in 1..=200 {
            for l in 1..=k_max {
                let lhs = step_product(l, k_max);
                let rhs = ((l as f64 + 1.0) / (k_max as f64 + 2.0)).powi(2);
                worst = worst.max(lhs - rhs);
                if lhs > rhs + 1e-12 {
                    violations += 1;
                }
            }
        }
        Ok((
            violations == 0,
            format!("{violations} violations over 20100 pairs, max(lhs - rhs) = {worst:.3e}"),
        ))
    })
}

fn unit_bounds() -> ProblemBounds {
    ProblemBounds {
        grad_l2: 1.0,
        grad_inf: 1.0,
        smoothness: Smoothness::Smooth(1.0),
        constraint_bound: 1.0,
        diameter_l1: 1.0,
        diameter_l2: 1.0,
        dim: 1,
    }
}

/// Block counts and dual step products from the parameter derivations.
pub fn parameter_derivations() -> Outcome {
    timed(4, "parameter derivations", Duration::from_secs(1), || {
        let bounds = unit_bounds();
        let meta = OracleMeta::new(0.75, 0.0, 1.0, 0.0)?;
        let p1 = derive_params_alg1(4096, &meta, &bounds, 0.0)?;
        let p2 = derive_params_alg2(256, &bounds, 0.25)?;
        let prod1 = p1.theta * p1.mu * (p1.blocks as f64 + 1.0);
        let prod2 = p2.mu * p2.theta * (p2.horizon as f64 + 2.0);
        let eps = 4.0 * f64::EPSILON;
        let ok = (p1.blocks, p1.block_len) == (16, 256)
            && p2.inner_steps == 64
            && (prod1 - 1.0).abs() <= eps
            && (prod2 - 1.0).abs() <= eps;
        Ok((
            ok,
            format!(
                "(Q, K) = ({}, {}), K = {}, θμ(Q+1) - 1 = {:.1e}, μθ(T+2) - 1 = {:.1e}",
                p1.blocks,
                p1.block_len,
                p2.inner_steps,
                prod1 - 1.0,
                prod2 - 1.0
            ),
        ))
    })
}

/// Reference for the clamped dual step, written independently of the library.
fn reference_dual(lambda: f64, g: f64, theta: f64, mu: f64) -> f64 {
    let raw = (1.0 - theta * mu) * lambda + mu * g;
    match raw.partial_cmp(&0.0) {
        Some(std::cmp::Ordering::Greater) => raw,
        _ => 0.0,
    }
}

/// Both dual recursions against the reference, bit for bit.
pub fn dual_recursion_exactness() -> Outcome {
    timed(5, "dual recursion exactness", Duration::from_secs(10), || {
        let mut rng = rng::stream(MASTER_SEED, "accept-dual");
        let mut mismatches = 0usize;
        let mut negatives = 0usize;
        for i in 0..100_000u32 {
            let theta = rng.random_range(1e-3..10.0);
            let mu = rng.random_range(0.0..1.0) / theta;
            // Every tenth tuple starts from λ = 0 to exercise the clamp.
            let lambda = if i % 10 == 0 { 0.0 } else { rng.random_range(0.0..100.0) };
            let g = rng.random_range(-50.0..50.0);
            let want = reference_dual(lambda, g, theta, mu).to_bits();
            for got in [dual_update(lambda, g, theta, mu), block_dual_update(lambda, g, theta, mu)] {
                if got.to_bits() != want {
                    mismatches += 1;
                }
                if got.is_sign_negative() || got.is_nan() {
                    negatives += 1;
                }
            }
        }
        Ok((
            mismatches == 0 && negatives == 0,
            format!("{mismatches} bit mismatches, {negatives} negative results over 10^5 tuples"),
        ))
    })
}

/// Low-rank matrix completion with PDMFW: (m, n, k, b) = (20, 20, 2, 40), β = 0.1.
pub fn matrix_completion_config() -> ExperimentConfig {
    ExperimentConfig {
        problem: ProblemConfig::MatrixCompletion { m: 20, n: 20, b: 40 },
        domain: DomainConfig::NuclearBall { radius: 2.0 },
        algorithm: OneOrMany::One(AlgorithmId::Pdmfw),
        oracle: OracleId::Ocg,
        horizon: OneOrMany::Many(vec![64, 128, 256, 512]),
        beta: 0.1,
        seeds: (0..10).collect(),
        output_dir: std::env::temp_dir().join("pfoco-acceptance-mc"),
        tape_path: None,
        pdmfw: Default::default(),
        benchmark: BenchmarkConfig {
            iters: 500,
            ..Default::default()
        },
    }
}

/// Stochastic quadratic testbed with the blocked framework and OCG, β = 0.
pub fn quadratic_config() -> ExperimentConfig {
    ExperimentConfig {
        problem: ProblemConfig::StochasticQuadratic {
            dim: 5,
            center_noise: 0.5,
            constraint: ConstraintFamily::ZeroMean { noise: 1.0 },
        },
        domain: DomainConfig::Box { lo: -1.0, hi: 1.0 },
        algorithm: OneOrMany::One(AlgorithmId::Alg1),
        oracle: OracleId::Ocg,
        horizon: OneOrMany::Many(vec![256, 1024, 4096]),
        beta: 0.0,
        seeds: (0..10).collect(),
        output_dir: std::env::temp_dir().join("pfoco-acceptance-quad"),
        tape_path: None,
        pdmfw: Default::default(),
        benchmark: BenchmarkConfig {
            iters: 2000,
            ..Default::default()
        },
    }
}

/// Options for acceptance runs: every played and inner iterate is checked.
pub fn run_options() -> RunOptions {
    RunOptions {
        feasibility: FeasibilityCheck::All,
        feasibility_tol: FEASIBILITY_TOL,
        record_iterates: false,
    }
}

/// Outputs of one growth experiment, kept for the feasibility and
/// determinism checks.
pub struct GrowthRuns {
    pub config: ExperimentConfig,
    pub outputs: Result<Vec<CellOutput>>,
    pub elapsed: Duration,
}

impl GrowthRuns {
    pub fn execute(config: ExperimentConfig) -> Self {
        let start = Instant::now();
        let outputs = run_cells(&config, &cells(&config), &run_options());
        Self {
            config,
            outputs,
            elapsed: start.elapsed(),
        }
    }
}

/// Seed-mean of a summary field at each horizon, in config order.
fn seed_means(config: &ExperimentConfig, outputs: &[CellOutput], field: impl Fn(&CellOutput) -> f64) -> Vec<(usize, Vec<f64>)> {
    config
        .horizons()
        .into_iter()
        .map(|t| {
            let vals = outputs.iter().filter(|o| o.cell.horizon == t).map(&field).collect();
            (t, vals)
        })
        .collect()
}

fn growth_outcome(
    id: u8,
    name: &'static str,
    runs: &GrowthRuns,
    slope_cap: f64,
    check_violation_centre: bool,
) -> Outcome {
    let limit = Duration::from_secs(300);
    let mut outcome = timed(id, name, limit, || {
        let outputs = runs.outputs.as_ref().map_err(|e| Error::Config(e.to_string()))?;
        let regret = seed_means(&runs.config, outputs, |o| o.summary.regret);
        let ts: Vec<f64> = regret.iter().map(|(t, _)| *t as f64).collect();
        let means: Vec<f64> = regret.iter().map(|(_, v)| mean_and_stderr(v).0).collect();
        let fit = slope_fit_magnitude(&ts, &means)?;
        let listing: Vec<String> = regret
            .iter()
            .zip(&means)
            .map(|((t, _), m)| format!("T={t}: {m:.3}"))
            .collect();
        let mut passed = fit.slope <= slope_cap;
        let mut detail = format!(
            "regret slope {:.3} (<= {slope_cap:.4}, r² {:.3}); mean regret {}",
            fit.slope,
            fit.r2,
            listing.join(", ")
        );

        let violation = seed_means(&runs.config, outputs, |o| o.summary.violation);
        let v_means: Vec<f64> = violation.iter().map(|(_, v)| mean_and_stderr(v).0).collect();
        if v_means.iter().all(|v| *v > 0.0) {
            let vfit = slope_fit(&ts, &v_means)?;
            detail.push_str(&format!("; violation slope {:.3}", vfit.slope));
        } else {
            detail.push_str("; violation non-positive at some T, bound vacuously satisfied");
        }
        if check_violation_centre {
            let (_, last) = violation.last().expect("at least one horizon");
            let (mean, se) = mean_and_stderr(last);
            let centred = mean.abs() <= 3.0 * se;
            passed &= centred;
            detail.push_str(&format!(
                "; violation at T={} is {mean:.3} ± {se:.3} (|mean| <= 3 SE: {centred})",
                violation.last().map(|(t, _)| *t).unwrap_or(0)
            ));
        }
        Ok((passed, detail))
    });
    outcome.elapsed += runs.elapsed;
    if outcome.elapsed > limit && outcome.passed {
        outcome.passed = false;
        outcome.detail.push_str("; over the 300s budget");
    }
    outcome
}

/// Regret growth of PDMFW on matrix completion.
pub fn matrix_completion_growth(runs: &GrowthRuns) -> Outcome {
    growth_outcome(6, "pdmfw regret growth", runs, 0.7, true)
}

/// Regret growth of the blocked framework with OCG on the quadratic testbed.
pub fn quadratic_growth(runs: &GrowthRuns) -> Outcome {
    let alpha = 0.75;
    let cap = (2.0 - alpha) / (3.0 - 2.0 * alpha) + 0.1;
    growth_outcome(7, "alg1 + ocg regret growth", runs, cap, false)
}

/// Every run finished with zero feasibility failures.
pub fn feasibility(all: &[&GrowthRuns]) -> Outcome {
    timed(8, "feasibility sweep", Duration::from_secs(1), || {
        let mut checked = 0usize;
        let mut failures = Vec::new();
        for runs in all {
            match &runs.outputs {
                Ok(outs) => checked += outs.iter().map(|o| o.log.feasibility_checks).sum::<usize>(),
                Err(e) => failures.push(e.to_string()),
            }
        }
        Ok((
            failures.is_empty() && checked > 0,
            if failures.is_empty() {
                format!("{checked} iterates within 1e-8 of the domain, 0 failures")
            } else {
                format!("failures: {}", failures.join("; "))
            },
        ))
    })
}

/// Reruns a few cells and compares the records CSV byte for byte.
pub fn determinism(all: &[&GrowthRuns]) -> Outcome {
    timed(9, "determinism", Duration::from_secs(300), || {
        let mut compared = 0usize;
        let mut differing = Vec::new();
        for runs in all {
            let outputs = runs.outputs.as_ref().map_err(|e| Error::Config(e.to_string()))?;
            let horizons = runs.config.horizons();
            let subset: Vec<Cell> = outputs
                .iter()
                .map(|o| o.cell)
                .filter(|c| c.horizon == horizons[0] && c.seed < 3)
                .collect();
            let again = run_cells(&runs.config, &subset, &run_options())?;
            for rerun in again {
                let first = outputs
                    .iter()
                    .find(|o| o.cell == rerun.cell)
                    .expect("subset drawn from outputs");
                compared += 1;
                if records_csv(&first.log.records).as_bytes() != records_csv(&rerun.log.records).as_bytes() {
                    differing.push(rerun.cell.stem());
                }
            }
        }
        Ok((
            differing.is_empty() && compared > 0,
            format!("{compared} reruns compared, {} differed {:?}", differing.len(), differing),
        ))
    })
}

/// Runs all nine checks in order.
pub fn run_all() -> Vec<Outcome> {
    let mut out = vec![
        lmo_correctness(),
        ftpl_bound(),
        step_product_lemma(),
        parameter_derivations(),
        dual_recursion_exactness(),
    ];
    let mc = GrowthRuns::execute(matrix_completion_config());
    let quad = GrowthRuns::execute(quadratic_config());
    out.push(matrix_completion_growth(&mc));
    out.push(quadratic_growth(&quad));
    out.push(feasibility(&[&mc, &quad]));
    out.push(determinism(&[&mc, &quad]));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_dual_clamps_to_positive_zero() {
        assert_eq!(reference_dual(0.0, -1.0, 1.0, 0.5).to_bits(), 0.0f64.to_bits());
        assert_eq!(reference_dual(0.0, -0.0, 1.0, 0.5).to_bits(), 0.0f64.to_bits());
        assert_eq!(reference_dual(2.0, 1.0, 1.0, 0.5), 1.5);
    }

    #[test]
    fn fast_checks_pass() {
        for outcome in [step_product_lemma(), parameter_derivations()] {
            assert!(outcome.passed, "{outcome}");
        }
    }
}
