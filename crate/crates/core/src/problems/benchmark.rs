//! Offline benchmark `x*`: minimizer of the realized loss sum subject to the
//! expected constraint `ḡ(x) ≤ 0`, computed with Frank-Wolfe.

use std::sync::Arc;

use log::warn;
use rand::SeedableRng;
use serde::Serialize;

use super::MeanConstraint;
use crate::domains::DomainSpec;
use crate::error::Result;
use crate::functions::{RoundFn, RoundFunctions, SumOf};
use crate::fw;
use crate::point::Point;
use crate::rng::Stream;

/// Number of penalty doublings before giving up on `ḡ(x) ≤ tol`.
const MAX_DOUBLINGS: usize = 40;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BenchmarkOptions {
    pub iters: usize,
    /// Target Frank-Wolfe duality gap on the solved surrogate.
    pub gap_tol: f64,
    /// Accepted residual `ḡ(x*) ≤ constraint_tol` in penalty mode.
    pub constraint_tol: f64,
    pub seed: u64,
}

impl Default for BenchmarkOptions {
    fn default() -> Self {
        Self {
            iters: 2000,
            gap_tol: 1e-6,
            constraint_tol: 1e-4,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchmarkSolution {
    pub x_star: Point,
    /// `Σ_t f_t(x*)`.
    pub objective: f64,
    pub gap: f64,
    /// Final quadratic-penalty weight (penalty mode only).
    pub penalty: Option<f64>,
    /// `ḡ(x*)` (0 when `ḡ ≡ 0`).
    pub mean_constraint: f64,
    /// False when the gap or the constraint residual missed its tolerance.
    pub converged: bool,
    pub values: Vec<f64>,
}

/// `Σf_t(x) + (P/2)·[ḡ(x)]₊²`.
struct PenalizedSum<'a> {
    losses: &'a SumOf,
    mean: &'a dyn RoundFn,
    weight: f64,
}

impl RoundFn for PenalizedSum<'_> {
    fn value(&self, x: &Point) -> f64 {
        let excess = self.mean.value(x).max(0.0);
        self.losses.value(x) + 0.5 * self.weight * excess * excess
    }

    fn add_gradient(&self, x: &Point, scale: f64, out: &mut [f64]) {
        self.losses.add_gradient(x, scale, out);
        let excess = self.mean.value(x).max(0.0);
        if excess > 0.0 {
            self.mean.add_gradient(x, scale * self.weight * excess, out);
        }
    }
}

/// Solves for the benchmark point on the realized rounds.
///
/// With `ḡ ≡ 0` this is plain Frank-Wolfe on `Σ f_t`. Otherwise a quadratic
/// penalty on `[ḡ]₊` is doubled until `ḡ(x) ≤ constraint_tol`.
pub fn benchmark_solve(
    rounds: &[RoundFunctions],
    mean: &MeanConstraint,
    domain: &DomainSpec,
    start: Point,
    options: &BenchmarkOptions,
) -> Result<BenchmarkSolution> {
    let losses = SumOf(rounds.iter().map(|r| Arc::clone(&r.loss)).collect());
    let mut rng = Stream::seed_from_u64(options.seed);
    match mean {
        MeanConstraint::Zero => {
            let out = fw::minimize(&losses, domain, start, options.iters, options.gap_tol, &mut rng)?;
            let converged = out.gap <= options.gap_tol;
            if !converged {
                warn!("benchmark gap {:.3e} above tolerance {:.3e}", out.gap, options.gap_tol);
            }
            Ok(BenchmarkSolution {
                objective: out.best_value,
                x_star: out.best,
                gap: out.gap,
                penalty: None,
                mean_constraint: 0.0,
                converged,
                values: out.values,
            })
        }
        MeanConstraint::Known(gbar) => {
            let mut weight = rounds.len().max(1) as f64;
            let mut x = start;
            let mut values = Vec::new();
            let mut last = None;
            for _ in 0..MAX_DOUBLINGS {
                let surrogate = PenalizedSum {
                    losses: &losses,
                    mean: gbar.as_ref(),
                    weight,
                };
                let out = fw::minimize(&surrogate, domain, x, options.iters, options.gap_tol, &mut rng)?;
                values.extend_from_slice(&out.values);
                let residual = gbar.value(&out.best);
                x = out.best.clone();
                last = Some((out, residual));
                if residual <= options.constraint_tol {
                    break;
                }
                weight *= 2.0;
            }
            let (out, residual) = last.expect("at least one penalty round");
            let converged = out.gap <= options.gap_tol && residual <= options.constraint_tol;
            if !converged {
                warn!(
                    "benchmark penalty solve stopped with gap {:.3e}, residual {:.3e}",
                    out.gap, residual
                );
            }
            Ok(BenchmarkSolution {
                objective: losses.value(&out.best),
                x_star: out.best,
                gap: out.gap,
                penalty: Some(weight),
                mean_constraint: residual,
                converged,
                values,
            })
        }
    }
}
