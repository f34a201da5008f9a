//! Per-round loss and constraint functions, problem constants, and the
//! penalized / augmented-Lagrangian quantities built from them.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::point::Point;

/// First-order oracle for one round's loss or constraint.
pub trait RoundFn: Send + Sync {
    fn value(&self, x: &Point) -> f64;

    /// `out += scale * ∇h(x)`.
    fn add_gradient(&self, x: &Point, scale: f64, out: &mut [f64]);

    fn gradient(&self, x: &Point) -> Point {
        let mut g = Point::zeros_like(x);
        self.add_gradient(x, 1.0, g.as_mut_slice());
        g
    }
}

/// Adapter turning a pair of closures into a [`RoundFn`].
pub struct FnRound<V, G> {
    value: V,
    gradient: G,
}

impl<V, G> FnRound<V, G>
where
    V: Fn(&[f64]) -> f64 + Send + Sync,
    G: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    pub fn new(value: V, gradient: G) -> Self {
        Self { value, gradient }
    }
}

impl<V, G> RoundFn for FnRound<V, G>
where
    V: Fn(&[f64]) -> f64 + Send + Sync,
    G: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    fn value(&self, x: &Point) -> f64 {
        (self.value)(x.as_slice())
    }

    fn add_gradient(&self, x: &Point, scale: f64, out: &mut [f64]) {
        let g = (self.gradient)(x.as_slice());
        for (o, gi) in out.iter_mut().zip(g) {
            *o += scale * gi;
        }
    }
}

/// Linear function `⟨c, x⟩ + offset`.
#[derive(Clone, Debug)]
pub struct Linear {
    pub coef: Vec<f64>,
    pub offset: f64,
}

impl RoundFn for Linear {
    fn value(&self, x: &Point) -> f64 {
        crate::point::dot(&self.coef, x.as_slice()) + self.offset
    }

    fn add_gradient(&self, _x: &Point, scale: f64, out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(&self.coef) {
            *o += scale * c;
        }
    }
}

/// `h = f + λ·g` as a standalone function.
#[derive(Clone)]
pub struct Penalized {
    pub loss: Arc<dyn RoundFn>,
    pub constraint: Arc<dyn RoundFn>,
    pub lambda: f64,
}

impl Penalized {
    pub fn of(rf: &RoundFunctions, lambda: f64) -> Self {
        Self {
            loss: rf.loss.clone(),
            constraint: rf.constraint.clone(),
            lambda,
        }
    }
}

impl RoundFn for Penalized {
    fn value(&self, x: &Point) -> f64 {
        self.loss.value(x) + self.lambda * self.constraint.value(x)
    }

    fn add_gradient(&self, x: &Point, scale: f64, out: &mut [f64]) {
        self.loss.add_gradient(x, scale, out);
        if self.lambda != 0.0 {
            self.constraint.add_gradient(x, scale * self.lambda, out);
        }
    }
}

/// Sum of a sequence of functions.
#[derive(Clone, Default)]
pub struct SumOf(pub Vec<Arc<dyn RoundFn>>);

impl RoundFn for SumOf {
    fn value(&self, x: &Point) -> f64 {
        self.0.iter().map(|h| h.value(x)).sum()
    }

    fn add_gradient(&self, x: &Point, scale: f64, out: &mut [f64]) {
        for h in &self.0 {
            h.add_gradient(x, scale, out);
        }
    }
}

/// The loss `f_t` and constraint `g_t` revealed at round `t` (1-based).
#[derive(Clone)]
pub struct RoundFunctions {
    pub t: usize,
    pub loss: Arc<dyn RoundFn>,
    pub constraint: Arc<dyn RoundFn>,
}

impl fmt::Debug for RoundFunctions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RoundFunctions").field("t", &self.t).finish_non_exhaustive()
    }
}

impl RoundFunctions {
    pub fn new(t: usize, loss: Arc<dyn RoundFn>, constraint: Arc<dyn RoundFn>) -> Self {
        Self {
            t,
            loss,
            constraint,
        }
    }

    pub fn loss_value(&self, x: &Point) -> f64 {
        self.loss.value(x)
    }

    pub fn constraint_value(&self, x: &Point) -> f64 {
        self.constraint.value(x)
    }
}

/// Smoothness constant. Non-smooth functions count as ∞-smooth with `0·∞ = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothness {
    Smooth(f64),
    NonSmooth,
}

impl Smoothness {
    pub fn is_smooth(self) -> bool {
        matches!(self, Smoothness::Smooth(_))
    }

    /// `coef · L` under the convention `0 · ∞ = 0`; `None` means infinite.
    pub fn scaled(self, coef: f64) -> Option<f64> {
        match self {
            Smoothness::Smooth(l) => Some(coef * l),
            Smoothness::NonSmooth if coef == 0.0 => Some(0.0),
            Smoothness::NonSmooth => None,
        }
    }
}

/// Problem constants: gradient bounds, smoothness, constraint bound, diameters.
///
/// Gradient bounds are kept in both ℓ2 and ℓ∞ form. The blocked framework
/// reads `grad_l2`/`diameter_l2`; the Meta-Frank-Wolfe variant and FTPL read
/// `grad_inf`/`diameter_l1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProblemBounds {
    pub grad_l2: f64,
    pub grad_inf: f64,
    pub smoothness: Smoothness,
    /// `G` with `|g_t(x)| ≤ G` on the domain.
    pub constraint_bound: f64,
    /// `R`, the ℓ1 diameter.
    pub diameter_l1: f64,
    pub diameter_l2: f64,
    pub dim: usize,
}

impl ProblemBounds {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("grad_l2", self.grad_l2),
            ("grad_inf", self.grad_inf),
            ("constraint_bound", self.constraint_bound),
            ("diameter_l1", self.diameter_l1),
            ("diameter_l2", self.diameter_l2),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if let Smoothness::Smooth(l) = self.smoothness {
            if !(l.is_finite() && l >= 0.0) {
                return Err(Error::InvalidParameter(format!("smoothness must be >= 0, got {l}")));
            }
        }
        if self.dim == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        Ok(())
    }
}

/// Dual variable with its augmentation and step-size parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualState {
    pub lambda: f64,
    pub theta: f64,
    pub mu: f64,
}

impl DualState {
    pub fn new(theta: f64, mu: f64) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite() && mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "theta and mu must be positive, got theta={theta} mu={mu}"
            )));
        }
        Ok(Self {
            lambda: 0.0,
            theta,
            mu,
        })
    }

    /// One clamped ascent step driven by a constraint value (or block sum).
    pub fn ascend(&mut self, g_sum: f64) -> f64 {
        self.lambda = clamped_ascent(self.lambda, g_sum, self.theta, self.mu);
        self.lambda
    }
}

/// `[(1 − θμ)λ + μ·g]₊`, shared by the per-block and per-round dual updates.
#[inline]
pub fn clamped_ascent(lambda: f64, g_sum: f64, theta: f64, mu: f64) -> f64 {
    let raw = (1.0 - theta * mu) * lambda + mu * g_sum;
    // +0.0 for every non-positive value, including −0.0.
    if raw > 0.0 {
        raw
    } else {
        0.0
    }
}

/// `∇f_t(x) + λ∇g_t(x)`.
pub fn penalized_grad(rf: &RoundFunctions, lambda: f64, x: &Point) -> Result<Point> {
    let mut g = Point::zeros_like(x);
    rf.loss.add_gradient(x, 1.0, g.as_mut_slice());
    if lambda != 0.0 {
        rf.constraint.add_gradient(x, lambda, g.as_mut_slice());
    }
    if !g.is_finite() {
        return Err(Error::NonFiniteGradient { round: rf.t });
    }
    Ok(g)
}

/// `f_t(x) + λ g_t(x) − θλ² / (2·K_scale)`; `K_scale = 1` per round, `K` per block.
pub fn aug_lagrangian_value(
    rf: &RoundFunctions,
    x: &Point,
    lambda: f64,
    theta: f64,
    k_scale: f64,
) -> f64 {
    aug_lagrangian_from_values(rf.loss_value(x), rf.constraint_value(x), lambda, theta, k_scale)
}

pub fn aug_lagrangian_from_values(f: f64, g: f64, lambda: f64, theta: f64, k_scale: f64) -> f64 {
    f + lambda * g - theta * lambda * lambda / (2.0 * k_scale)
}

/// `∂L/∂λ = g − (θ/K_scale)·λ`.
pub fn dual_grad(g_val: f64, lambda: f64, theta: f64, k_scale: f64) -> f64 {
    g_val - theta / k_scale * lambda
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_round() -> RoundFunctions {
        // f(x) = x², g(x) = x
        let f = FnRound::new(|x: &[f64]| x[0] * x[0], |x: &[f64]| vec![2.0 * x[0]]);
        let g = FnRound::new(|x: &[f64]| x[0], |_: &[f64]| vec![1.0]);
        RoundFunctions::new(1, Arc::new(f), Arc::new(g))
    }

    #[test]
    fn penalized_grad_examples() {
        let rf = scalar_round();
        let x = Point::new(vec![1.0]).unwrap();
        assert_eq!(penalized_grad(&rf, 0.0, &x).unwrap().as_slice(), &[2.0]);
        assert_eq!(penalized_grad(&rf, 2.0, &x).unwrap().as_slice(), &[4.0]);
    }

    #[test]
    fn penalized_grad_reports_round_of_non_finite_gradient() {
        let f = FnRound::new(|_: &[f64]| 0.0, |_: &[f64]| vec![f64::NAN]);
        let g = FnRound::new(|_: &[f64]| 0.0, |_: &[f64]| vec![0.0]);
        let rf = RoundFunctions::new(7, Arc::new(f), Arc::new(g));
        let err = penalized_grad(&rf, 1.0, &Point::zeros(1)).unwrap_err();
        assert!(matches!(err, Error::NonFiniteGradient { round: 7 }));
    }

    #[test]
    fn aug_lagrangian_examples() {
        assert_eq!(aug_lagrangian_from_values(1.0, 2.0, 0.0, 1.0, 1.0), 1.0);
        assert_eq!(aug_lagrangian_from_values(1.0, 2.0, 3.0, 1.0, 1.0), 2.5);
        assert_eq!(aug_lagrangian_from_values(1.0, 2.0, 3.0, 1.0, 2.0), 4.75);
    }

    #[test]
    fn dual_grad_examples() {
        assert_eq!(dual_grad(0.0, 0.0, 1.0, 1.0), 0.0);
        assert_eq!(dual_grad(4.0, 1.0, 2.0, 1.0), 2.0);
    }

    #[test]
    fn smoothness_zero_times_infinity() {
        assert_eq!(Smoothness::NonSmooth.scaled(0.0), Some(0.0));
        assert_eq!(Smoothness::NonSmooth.scaled(1.0), None);
        assert_eq!(Smoothness::Smooth(2.0).scaled(3.0), Some(6.0));
    }

    #[test]
    fn dual_state_rejects_non_positive_parameters() {
        assert!(DualState::new(0.0, 1.0).is_err());
        assert!(DualState::new(1.0, -1.0).is_err());
        let mut s = DualState::new(2.0, 0.1).unwrap();
        assert_eq!(s.ascend(-5.0), 0.0);
    }
}
