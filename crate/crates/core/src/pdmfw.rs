//! Primal-Dual Meta-Frank-Wolfe: every round runs `K` Frank-Wolfe steps whose
//! directions come from `K` persistent FTPL learners, then takes one clamped
//! dual ascent step on the augmented Lagrangian.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alg1::{check_feasible, int_floor, FeasibilityCheck, RunOptions};
use crate::domains::DomainSpec;
use crate::error::{Error, Result};
use crate::ftpl::{FtplState, HistoryIndex};
use crate::functions::{clamped_ascent, penalized_grad, ProblemBounds, RoundFunctions};
use crate::fw::step_size;
use crate::metrics::{RoundRecord, RunLog};
use crate::point::Point;
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Alg2Params {
    pub horizon: usize,
    /// Inner Frank-Wolfe steps per round, `K = ⌊T^{1/2+β}⌋`.
    pub inner_steps: usize,
    pub beta: f64,
    pub theta: f64,
    pub mu: f64,
    /// FTPL perturbation parameter; its support is set by `PerturbationRange`.
    pub delta: f64,
}

/// `K = ⌊T^{1/2+β}⌋`, `θ = 12·R·D·√d / T^{1/2+β}`, `μ = 1/(θ(T+2))`,
/// `δ = 1/(2·D·√d·T^{1/2+β})` with `D` the ℓ∞ gradient bound and `R` the ℓ1 diameter.
///
/// `β = 0` is the strong-duality setting.
pub fn derive_params_alg2(horizon: usize, bounds: &ProblemBounds, beta: f64) -> Result<Alg2Params> {
    if horizon < 4 {
        return Err(Error::InvalidParameter(format!("horizon must be >= 4, got {horizon}")));
    }
    if !(0.0..0.5).contains(&beta) {
        return Err(Error::InvalidParameter(format!(
            "beta = {beta} outside the admissible interval [0, 0.5)"
        )));
    }
    bounds.validate()?;
    let power = (horizon as f64).powf(0.5 + beta);
    let root_d = (bounds.dim as f64).sqrt();
    let inner_steps = int_floor(power).max(1);
    let theta = 12.0 * bounds.diameter_l1 * bounds.grad_inf * root_d / power;
    let mu = 1.0 / (theta * (horizon as f64 + 2.0));
    let delta = 1.0 / (2.0 * bounds.grad_inf * root_d * power);
    Ok(Alg2Params {
        horizon,
        inner_steps,
        beta,
        theta,
        mu,
        delta,
    })
}

/// `λ_{t+1} = [(1 − θμ)λ_t + μ·g_t(x_t)]₊`.
pub fn dual_update(lambda: f64, g_val: f64, theta: f64, mu: f64) -> f64 {
    clamped_ascent(lambda, g_val, theta, mu)
}

/// Where each round's inner Frank-Wolfe pass starts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimalStart {
    /// `x_{t+1}^1 = x_t`.
    #[default]
    Warm,
    /// `x_{t+1}^1 = x_1`.
    Cold,
}

/// Support of the FTPL perturbation given the parameter `δ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationRange {
    /// `p ~ U[0, δ]^d`: a vanishing perturbation, close to follow-the-leader.
    #[default]
    Small,
    /// `p ~ U[0, 1/δ]^d`: the range under which the `R/δ + δdR Σ‖w‖²` bound is stated.
    Inverse,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alg2Options {
    #[serde(default)]
    pub start: PrimalStart,
    #[serde(default)]
    pub history: HistoryIndex,
    #[serde(default)]
    pub perturbation: PerturbationRange,
}

/// Result of one inner Frank-Wolfe pass.
#[derive(Clone, Debug)]
pub struct PrimalPass {
    pub next: Point,
    /// Inner iterates `x^1..x^K` (the points each learner's next gradient is taken at).
    pub inner: Vec<Point>,
    /// Directions `v^1..v^K`.
    pub directions: Vec<Point>,
}

/// Runs `x^{k+1} = x^k + γ_k(v^k − x^k)` for `k = 1..K` with `v^k` from learner `k`.
pub fn primal_update(x_start: Point, oracles: &mut [FtplState], domain: &DomainSpec) -> Result<PrimalPass> {
    let directions: Vec<Point> = oracles
        .par_iter_mut()
        .map(FtplState::select)
        .collect::<Result<_>>()?;
    for v in &directions {
        if !domain.contains(v, 1e-8)? {
            return Err(Error::Infeasible {
                round: 0,
                detail: "linear minimization oracle returned an infeasible direction".into(),
            });
        }
    }
    Ok(combine(x_start, directions))
}

fn combine(x_start: Point, directions: Vec<Point>) -> PrimalPass {
    let mut inner = Vec::with_capacity(directions.len());
    let mut x = x_start;
    for (k, v) in directions.iter().enumerate() {
        let next = {
            let mut y = x.clone();
            y.step_toward(v, step_size(k + 1));
            y
        };
        inner.push(std::mem::replace(&mut x, next));
    }
    PrimalPass {
        next: x,
        inner,
        directions,
    }
}

/// Builds the `K` FTPL learners, each on its own random stream.
pub fn build_learners(
    domain: &DomainSpec,
    params: &Alg2Params,
    options: &Alg2Options,
    seed: u64,
) -> Result<Vec<FtplState>> {
    // FtplState samples from [0, 1/δ']; δ' = 1/δ gives the [0, δ] box.
    let ftpl_delta = match options.perturbation {
        PerturbationRange::Small => 1.0 / params.delta,
        PerturbationRange::Inverse => params.delta,
    };
    (0..params.inner_steps)
        .map(|k| FtplState::new(domain.clone(), ftpl_delta, options.history, rng::child(seed, "ftpl", k as u64)))
        .collect()
}

/// Runs Primal-Dual Meta-Frank-Wolfe over `rounds`.
#[allow(clippy::too_many_arguments)]
pub fn run_pdmfw<I>(
    rounds: I,
    domain: &DomainSpec,
    bounds: &ProblemBounds,
    params: &Alg2Params,
    alg_options: &Alg2Options,
    x1: Point,
    seed: u64,
    options: &RunOptions,
) -> Result<RunLog>
where
    I: IntoIterator<Item = RoundFunctions>,
{
    bounds.validate()?;
    let mut stream = rounds.into_iter();
    let horizon = params.horizon;
    let mut log = RunLog {
        records: Vec::with_capacity(horizon),
        iterates: options.record_iterates.then(Vec::new),
        params: serde_json::to_value(params)?,
        ..RunLog::default()
    };
    if options.feasibility != FeasibilityCheck::Off {
        check_feasible(domain, &x1, 1, options, &mut log.feasibility_checks)?;
    }
    let mut learners = build_learners(domain, params, alg_options, seed)?;
    let mut inner = vec![x1.clone(); params.inner_steps];
    let mut x = x1.clone();
    let mut lambda = 0.0;

    for t in 1..=horizon {
        let rf = stream.next().ok_or(Error::StreamTooShort {
            expected: horizon,
            got: t - 1,
        })?;
        let f_val = rf.loss_value(&x);
        let g_val = rf.constraint_value(&x);
        log.records.push(RoundRecord {
            t,
            f_val,
            g_val,
            lambda,
            x_hash: x.digest(),
        });
        log.lambda_sq_sum += lambda * lambda;

        for (learner, xk) in learners.iter_mut().zip(&inner) {
            learner.observe(penalized_grad(&rf, lambda, xk)?)?;
        }
        let start = match alg_options.start {
            PrimalStart::Warm => x.clone(),
            PrimalStart::Cold => x1.clone(),
        };
        let pass = primal_update(start, &mut learners, domain).map_err(|e| match e {
            Error::Infeasible { detail, .. } => Error::Infeasible { round: t + 1, detail },
            other => other,
        })?;
        match options.feasibility {
            FeasibilityCheck::Off => {}
            FeasibilityCheck::Played => {
                check_feasible(domain, &pass.next, t + 1, options, &mut log.feasibility_checks)?
            }
            FeasibilityCheck::All => {
                for p in pass.inner.iter().chain(std::iter::once(&pass.next)) {
                    check_feasible(domain, p, t + 1, options, &mut log.feasibility_checks)?;
                }
            }
        }
        lambda = dual_update(lambda, g_val, params.theta, params.mu);
        inner = pass.inner;
        if let Some(iterates) = log.iterates.as_mut() {
            iterates.push(std::mem::replace(&mut x, pass.next));
        } else {
            x = pass.next;
        }
    }
    Ok(log)
}
