//! Stochastic quadratic testbed on a box.
//!
//! `f_t(x) = ½‖x − c_t‖²` with `c_t = c̄ + σ·U[−1, 1]^d`, and a linear
//! constraint `g_t(x) = ⟨a_t, x⟩ − b` with `a_t = ā + τ·U[−1, 1]^d`, so that
//! `ḡ(x) = ⟨ā, x⟩ − b` is known in closed form. Losses are 1-smooth.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{MeanConstraint, OnlineProblem};
use crate::domains::DomainSpec;
use crate::error::{Error, Result};
use crate::functions::{Linear, ProblemBounds, RoundFn, RoundFunctions, Smoothness};
use crate::point::{dot, Point};
use crate::rng::{self, Stream};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstraintFamily {
    /// `ā = 0`, `b = 0`: `ḡ ≡ 0`.
    ZeroMean { noise: f64 },
    /// Mean direction `ā`, offset `b`.
    Shifted { mean: Vec<f64>, offset: f64, noise: f64 },
}

#[derive(Clone, Debug)]
pub struct StochasticQuadraticInstance {
    pub center_mean: Vec<f64>,
    pub center_noise: f64,
    pub family: ConstraintFamily,
    pub seed: u64,
    domain: DomainSpec,
}

impl StochasticQuadraticInstance {
    /// Instance on `[lo, hi]^dim` with `c̄ ~ U[1.5·lo, 1.5·hi]^d` drawn from `seed`.
    pub fn generate(dim: usize, lo: f64, hi: f64, center_noise: f64, family: ConstraintFamily, seed: u64) -> Result<Self> {
        let mut rng = rng::stream(seed, "quad-center");
        let center_mean = (0..dim)
            .map(|_| 1.5 * (lo + (hi - lo) * rng.random::<f64>()))
            .collect();
        Self::new(DomainSpec::cube(dim, lo, hi)?, center_mean, center_noise, family, seed)
    }

    pub fn new(
        domain: DomainSpec,
        center_mean: Vec<f64>,
        center_noise: f64,
        family: ConstraintFamily,
        seed: u64,
    ) -> Result<Self> {
        if !matches!(domain, DomainSpec::Box { .. }) {
            return Err(Error::InvalidParameter("quadratic testbed is defined on a box".into()));
        }
        let dim = domain.dim();
        if center_mean.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: center_mean.len(),
            });
        }
        let noise_ok = |v: f64| v.is_finite() && v >= 0.0;
        let family_ok = match &family {
            ConstraintFamily::ZeroMean { noise } => noise_ok(*noise) && *noise > 0.0,
            ConstraintFamily::Shifted { mean, offset, noise } => {
                if mean.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: mean.len(),
                    });
                }
                noise_ok(*noise) && offset.is_finite() && mean.iter().all(|v| v.is_finite())
            }
        };
        if !family_ok || !noise_ok(center_noise) {
            return Err(Error::InvalidParameter("noise levels must be finite and nonnegative".into()));
        }
        Ok(Self {
            center_mean,
            center_noise,
            family,
            seed,
            domain,
        })
    }

    fn constraint_parts(&self) -> (Vec<f64>, f64, f64) {
        let dim = self.domain.dim();
        match &self.family {
            ConstraintFamily::ZeroMean { noise } => (vec![0.0; dim], 0.0, *noise),
            ConstraintFamily::Shifted { mean, offset, noise } => (mean.clone(), *offset, *noise),
        }
    }

    pub fn sample_round<R: Rng + ?Sized>(&self, t: usize, rng: &mut R) -> RoundFunctions {
        let (a_mean, offset, a_noise) = self.constraint_parts();
        let center = self
            .center_mean
            .iter()
            .map(|c| c + self.center_noise * rng.random_range(-1.0..=1.0))
            .collect();
        let coef = a_mean
            .iter()
            .map(|a| a + a_noise * rng.random_range(-1.0..=1.0))
            .collect();
        RoundFunctions::new(
            t,
            Arc::new(QuadraticLoss { center }),
            Arc::new(Linear { coef, offset: -offset }),
        )
    }

    pub(crate) fn round_stream(&self) -> Stream {
        rng::stream(self.seed, "quad-rounds")
    }

    /// `ḡ(x)` in closed form.
    pub fn mean_constraint_value(&self, x: &Point) -> f64 {
        let (a_mean, offset, _) = self.constraint_parts();
        dot(&a_mean, x.as_slice()) - offset
    }

    fn box_extent(&self) -> (&[f64], &[f64]) {
        match &self.domain {
            DomainSpec::Box { lo, hi } => (lo, hi),
            _ => unreachable!("checked at construction"),
        }
    }
}

impl OnlineProblem for StochasticQuadraticInstance {
    fn name(&self) -> &'static str {
        "stochastic_quadratic"
    }

    fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    fn bounds(&self) -> ProblemBounds {
        let (lo, hi) = self.box_extent();
        let (a_mean, offset, a_noise) = self.constraint_parts();
        // |x_i − c_i| ≤ max(|lo_i − c_i|, |hi_i − c_i|) over the noise range.
        let f_grad: Vec<f64> = self
            .center_mean
            .iter()
            .zip(lo.iter().zip(hi))
            .map(|(c, (l, h))| {
                let c_lo = c - self.center_noise;
                let c_hi = c + self.center_noise;
                (h - c_lo).abs().max((l - c_hi).abs())
            })
            .collect();
        let g_grad: Vec<f64> = a_mean.iter().map(|a| a.abs() + a_noise).collect();
        let l2 = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let inf = |v: &[f64]| v.iter().fold(0.0_f64, |acc, x| acc.max(*x));
        let max_abs_x: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| l.abs().max(h.abs())).collect();
        let g_bound = dot(&g_grad, &max_abs_x) + offset.abs();
        ProblemBounds {
            grad_l2: l2(&f_grad).max(l2(&g_grad)),
            grad_inf: inf(&f_grad).max(inf(&g_grad)),
            smoothness: Smoothness::Smooth(1.0),
            constraint_bound: g_bound.max(f64::MIN_POSITIVE),
            diameter_l1: self.domain.diameter(),
            diameter_l2: self.domain.diameter_l2(),
            dim: self.domain.dim(),
        }
    }

    fn mean_constraint(&self) -> MeanConstraint {
        match &self.family {
            ConstraintFamily::ZeroMean { .. } => MeanConstraint::Zero,
            ConstraintFamily::Shifted { mean, offset, .. } => MeanConstraint::Known(Arc::new(Linear {
                coef: mean.clone(),
                offset: -offset,
            })),
        }
    }

    fn rounds(&self, horizon: usize) -> Vec<RoundFunctions> {
        let mut rng = self.round_stream();
        (1..=horizon).map(|t| self.sample_round(t, &mut rng)).collect()
    }
}

/// `½‖x − c‖²`.
#[derive(Clone, Debug)]
pub struct QuadraticLoss {
    pub center: Vec<f64>,
}

impl RoundFn for QuadraticLoss {
    fn value(&self, x: &Point) -> f64 {
        0.5 * x
            .as_slice()
            .iter()
            .zip(&self.center)
            .map(|(a, c)| (a - c).powi(2))
            .sum::<f64>()
    }

    fn add_gradient(&self, x: &Point, scale: f64, out: &mut [f64]) {
        for ((o, a), c) in out.iter_mut().zip(x.as_slice()).zip(&self.center) {
            *o += scale * (a - c);
        }
    }
}
