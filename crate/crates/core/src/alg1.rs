//! Blocked online primal-dual framework: `Q` blocks of `K` rounds; inside a
//! block an online oracle learns on the penalized losses `f_t + λ_q g_t`, and
//! the dual variable moves once per block.

use serde::Serialize;

use crate::domains::DomainSpec;
use crate::error::{Error, Result};
use crate::functions::{clamped_ascent, penalized_grad, ProblemBounds, RoundFunctions};
use crate::metrics::{RoundRecord, RunLog};
use crate::oracle::{oracle_reset, OracleFactory, OracleMeta, OracleReset};
use crate::point::Point;
use crate::rng;

/// Rounds `x` to the nearest integer when it is within floating-point noise of it.
pub(crate) fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        x
    }
}

pub(crate) fn int_ceil(x: f64) -> usize {
    snap(x).ceil() as usize
}

pub(crate) fn int_floor(x: f64) -> usize {
    snap(x).floor() as usize
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Alg1Params {
    pub horizon: usize,
    pub blocks: usize,
    pub block_len: usize,
    pub beta: f64,
    pub theta: f64,
    pub mu: f64,
    pub alpha: f64,
}

impl Alg1Params {
    /// Upper end of the admissible `β` interval, `(1 − α)/(3 − 2α)`.
    pub fn beta_max(alpha: f64) -> f64 {
        (1.0 - alpha) / (3.0 - 2.0 * alpha)
    }
}

/// `Q = ⌈T^{(2−2α)/(3−2α)}⌉`, `K = ⌈T^{1/(3−2α)}⌉`,
/// `θ = 3(C1·D + C2·L)·T^{α/(3−2α) − β}`, `μ = 1/(θ(Q+1))`.
///
/// `D` is the ℓ2 gradient bound.
pub fn derive_params_alg1(
    horizon: usize,
    meta: &OracleMeta,
    bounds: &ProblemBounds,
    beta: f64,
) -> Result<Alg1Params> {
    if horizon < 4 {
        return Err(Error::InvalidParameter(format!("horizon must be >= 4, got {horizon}")));
    }
    let alpha = meta.alpha;
    let beta_max = Alg1Params::beta_max(alpha);
    if !(beta >= 0.0 && beta <= beta_max + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "beta = {beta} outside the admissible interval [0, {beta_max}] for alpha = {alpha}"
        )));
    }
    let smooth_term = bounds.smoothness.scaled(meta.c2).ok_or_else(|| {
        Error::Config("oracle with C2 > 0 requires smooth losses, but the problem is non-smooth".into())
    })?;
    let scale = meta.c1 * bounds.grad_l2 + smooth_term;
    let t = horizon as f64;
    let denom = 3.0 - 2.0 * alpha;
    let blocks = int_ceil(t.powf((2.0 - 2.0 * alpha) / denom));
    let block_len = int_ceil(t.powf(1.0 / denom));
    let theta = 3.0 * scale * t.powf(alpha / denom - beta);
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "augmentation theta must be positive, got {theta} (C1·D + C2·L = {scale})"
        )));
    }
    let mu = 1.0 / (theta * (blocks as f64 + 1.0));
    Ok(Alg1Params {
        horizon,
        blocks,
        block_len,
        beta,
        theta,
        mu,
        alpha,
    })
}

/// `λ_{q+1} = [(1 − θμ)λ_q + μ·Σ_{block} g_t(x_t)]₊`.
pub fn block_dual_update(lambda: f64, g_block_sum: f64, theta: f64, mu: f64) -> f64 {
    clamped_ascent(lambda, g_block_sum, theta, mu)
}

/// Which points get the `contains(·, tol)` check during a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeasibilityCheck {
    Off,
    /// Every played point.
    Played,
    /// Played points and every inner Frank-Wolfe iterate.
    All,
}

#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub feasibility: FeasibilityCheck,
    pub feasibility_tol: f64,
    pub record_iterates: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            feasibility: FeasibilityCheck::Played,
            feasibility_tol: 1e-8,
            record_iterates: false,
        }
    }
}

pub(crate) fn check_feasible(
    domain: &DomainSpec,
    x: &Point,
    round: usize,
    options: &RunOptions,
    counter: &mut usize,
) -> Result<()> {
    if !domain.contains(x, options.feasibility_tol)? {
        return Err(Error::Infeasible {
            round,
            detail: format!("point violates the domain by more than {}", options.feasibility_tol),
        });
    }
    *counter += 1;
    Ok(())
}

/// Runs the blocked framework over `rounds`.
///
/// A fresh oracle is created at each block start, warm-started at the last
/// played point. Round `t`'s functions are pulled from the stream only after
/// `x_t` is fixed.
#[allow(clippy::too_many_arguments)]
pub fn run_alg1<I>(
    rounds: I,
    domain: &DomainSpec,
    bounds: &ProblemBounds,
    params: &Alg1Params,
    factory: &dyn OracleFactory,
    x1: Point,
    seed: u64,
    options: &RunOptions,
) -> Result<RunLog>
where
    I: IntoIterator<Item = RoundFunctions>,
{
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

    let mut x = x1;
    let mut lambda = 0.0;
    let mut t = 1;
    let mut q = 0;
    while t <= horizon {
        q += 1;
        let len = params.block_len.min(horizon - t + 1);
        let mut oracle = oracle_reset(
            factory,
            OracleReset {
                domain,
                x0: x.clone(),
                horizon: params.block_len,
                bounds,
                grad_bound: bounds.grad_l2 * (1.0 + lambda),
                rng: rng::child(seed, "alg1-oracle", q as u64),
            },
        )?;
        let mut block_sum = 0.0;
        for _ in 0..len {
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
            block_sum += g_val;

            let grad = penalized_grad(&rf, lambda, &x)?;
            let next = oracle.step(&grad)?;
            if options.feasibility != FeasibilityCheck::Off {
                check_feasible(domain, &next, t + 1, options, &mut log.feasibility_checks)?;
            }
            if let Some(iterates) = log.iterates.as_mut() {
                iterates.push(std::mem::replace(&mut x, next));
            } else {
                x = next;
            }
            t += 1;
        }
        lambda = block_dual_update(lambda, block_sum, params.theta, params.mu);
    }
    Ok(log)
}
