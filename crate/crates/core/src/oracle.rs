//! The `(α, C0, C1, C2)` online-oracle interface and Online Conditional
//! Gradient (OCG) as the built-in oracle for the blocked framework.

use std::sync::Arc;

use rand::SeedableRng;
use serde::Serialize;

use crate::domains::DomainSpec;
use crate::error::{Error, Result};
use crate::functions::{ProblemBounds, RoundFn, SumOf};
use crate::fw;
use crate::point::Point;
use crate::rng::Stream;

/// Regret certificate `(C0 + C1·D + C2·L)·K^α` of an online oracle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OracleMeta {
    pub alpha: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub requires_smooth: bool,
}

impl OracleMeta {
    pub fn new(alpha: f64, c0: f64, c1: f64, c2: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("oracle alpha must lie in (0, 1), got {alpha}")));
        }
        if [c0, c1, c2].iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::InvalidParameter("oracle constants must be nonnegative".into()));
        }
        Ok(Self {
            alpha,
            c0,
            c1,
            c2,
            requires_smooth: c2 > 0.0,
        })
    }
}

/// An online learner without long-term constraints. Emits the next decision
/// from the gradient observed at its previous decision.
pub trait OnlineOracle: Send {
    fn current(&self) -> &Point;

    fn step(&mut self, observed_grad: &Point) -> Result<Point>;
}

/// Everything needed to start a fresh oracle over `horizon` rounds.
pub struct OracleReset<'a> {
    pub domain: &'a DomainSpec,
    pub x0: Point,
    pub horizon: usize,
    pub bounds: &'a ProblemBounds,
    /// Gradient bound of the losses actually fed (e.g. `D·(1 + λ)` when penalized).
    pub grad_bound: f64,
    pub rng: Stream,
}

pub trait OracleFactory: Send + Sync {
    fn id(&self) -> &'static str;

    fn meta(&self, bounds: &ProblemBounds) -> OracleMeta;

    fn create(&self, reset: OracleReset<'_>) -> Result<Box<dyn OnlineOracle>>;
}

/// Validates a reset request and instantiates the oracle.
pub fn oracle_reset(factory: &dyn OracleFactory, reset: OracleReset<'_>) -> Result<Box<dyn OnlineOracle>> {
    let meta = factory.meta(reset.bounds);
    if meta.requires_smooth && !reset.bounds.smoothness.is_smooth() {
        return Err(Error::Config(format!(
            "oracle {} requires smooth losses but the problem is non-smooth",
            factory.id()
        )));
    }
    if reset.horizon == 0 {
        return Err(Error::InvalidParameter("oracle horizon must be >= 1".into()));
    }
    if !(reset.grad_bound > 0.0 && reset.grad_bound.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "gradient bound must be positive, got {}",
            reset.grad_bound
        )));
    }
    if !reset.domain.contains(&reset.x0, 1e-8)? {
        return Err(Error::Infeasible {
            round: 0,
            detail: "oracle start point lies outside the domain".into(),
        });
    }
    factory.create(reset)
}

/// Online Conditional Gradient.
///
/// Each step adds the observed gradient to a running sum and takes one
/// conditional-gradient step on `η⟨Σ∇, x⟩ + ‖x − x0‖²` with `σ_t = min(1, 2/√t)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Ocg;

impl Ocg {
    pub const ALPHA: f64 = 0.75;

    /// `η = R₂ / (2·Ĝ·K^{3/4})`.
    pub fn learning_rate(diameter_l2: f64, grad_bound: f64, horizon: usize) -> f64 {
        diameter_l2 / (2.0 * grad_bound * (horizon as f64).powf(0.75))
    }

    /// `σ_t = min(1, 2/√t)`.
    pub fn step_size(t: usize) -> f64 {
        (2.0 / (t as f64).sqrt()).min(1.0)
    }
}

impl OracleFactory for Ocg {
    fn id(&self) -> &'static str {
        "ocg"
    }

    fn meta(&self, bounds: &ProblemBounds) -> OracleMeta {
        OracleMeta {
            alpha: Self::ALPHA,
            c0: 0.0,
            c1: bounds.diameter_l2,
            c2: 0.0,
            requires_smooth: false,
        }
    }

    fn create(&self, reset: OracleReset<'_>) -> Result<Box<dyn OnlineOracle>> {
        Ok(Box::new(OcgState::new(
            reset.domain.clone(),
            reset.x0,
            Self::learning_rate(reset.domain.diameter_l2(), reset.grad_bound, reset.horizon),
            reset.rng,
        )))
    }
}

#[derive(Clone, Debug)]
pub struct OcgState {
    x0: Point,
    x_cur: Point,
    grad_sum: Point,
    eta: f64,
    t: usize,
    domain: DomainSpec,
    rng: Stream,
}

impl OcgState {
    pub fn new(domain: DomainSpec, x0: Point, eta: f64, rng: Stream) -> Self {
        let grad_sum = Point::zeros_like(&x0);
        Self {
            x_cur: x0.clone(),
            x0,
            grad_sum,
            eta,
            t: 0,
            domain,
            rng,
        }
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn rounds_seen(&self) -> usize {
        self.t
    }
}

impl OnlineOracle for OcgState {
    fn current(&self) -> &Point {
        &self.x_cur
    }

    fn step(&mut self, observed_grad: &Point) -> Result<Point> {
        if observed_grad.len() != self.x_cur.len() {
            return Err(Error::DimensionMismatch {
                expected: self.x_cur.len(),
                got: observed_grad.len(),
            });
        }
        if !observed_grad.is_finite() {
            return Err(Error::NonFiniteGradient { round: self.t + 1 });
        }
        self.t += 1;
        self.grad_sum.axpy(1.0, observed_grad);
        let mut direction = self.grad_sum.scaled(self.eta);
        direction.axpy(2.0, &self.x_cur);
        direction.axpy(-2.0, &self.x0);
        let v = self.domain.lmo(&direction, &mut self.rng)?;
        self.x_cur.step_toward(&v, Ocg::step_size(self.t));
        Ok(self.x_cur.clone())
    }
}

#[derive(Clone, Debug)]
pub struct RegretAudit {
    pub regret: f64,
    pub played_total: f64,
    pub best_total: f64,
    pub best_point: Point,
}

/// Realized regret of `emitted[k]` against the best fixed point found by
/// random search (plus the emitted points themselves) and a Frank-Wolfe polish.
///
/// Test and diagnostics tool; cost is `O((samples + polish_iters)·K)` evaluations.
pub fn regret_audit(
    losses: &[Arc<dyn RoundFn>],
    emitted: &[Point],
    domain: &DomainSpec,
    samples: usize,
    polish_iters: usize,
    seed: u64,
) -> Result<RegretAudit> {
    if losses.len() != emitted.len() {
        return Err(Error::LengthMismatch(format!(
            "{} losses but {} emitted points",
            losses.len(),
            emitted.len()
        )));
    }
    let played_total: f64 = losses.iter().zip(emitted).map(|(h, x)| h.value(x)).sum();
    let total = SumOf(losses.to_vec());
    let mut rng = Stream::seed_from_u64(seed);

    let mut best_point = emitted.first().cloned().unwrap_or_else(|| domain.canonical_point());
    let mut best_total = total.value(&best_point);
    let candidates = emitted
        .iter()
        .cloned()
        .chain((0..samples).map(|_| domain.sample(&mut rng)));
    for x in candidates {
        let v = total.value(&x);
        if v < best_total {
            best_total = v;
            best_point = x;
        }
    }
    if polish_iters > 0 {
        let polished = fw::minimize(&total, domain, best_point.clone(), polish_iters, 0.0, &mut rng)?;
        if polished.best_value < best_total {
            best_total = polished.best_value;
            best_point = polished.best;
        }
    }
    Ok(RegretAudit {
        regret: played_total - best_total,
        played_total,
        best_total,
        best_point,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{Linear, Smoothness};
    use crate::rng;

    fn bounds(dim: usize, smooth: bool) -> ProblemBounds {
        ProblemBounds {
            grad_l2: 1.0,
            grad_inf: 1.0,
            smoothness: if smooth { Smoothness::Smooth(1.0) } else { Smoothness::NonSmooth },
            constraint_bound: 1.0,
            diameter_l1: dim as f64,
            diameter_l2: (dim as f64).sqrt(),
            dim,
        }
    }

    struct SmoothOnly;

    impl OracleFactory for SmoothOnly {
        fn id(&self) -> &'static str {
            "smooth-only"
        }
        fn meta(&self, _: &ProblemBounds) -> OracleMeta {
            OracleMeta::new(0.5, 0.0, 1.0, 1.0).unwrap()
        }
        fn create(&self, reset: OracleReset<'_>) -> Result<Box<dyn OnlineOracle>> {
            Ocg.create(reset)
        }
    }

    #[test]
    fn meta_validation() {
        assert!(OracleMeta::new(1.0, 0.0, 0.0, 0.0).is_err());
        assert!(OracleMeta::new(0.5, -1.0, 0.0, 0.0).is_err());
        assert!(OracleMeta::new(0.5, 0.0, 1.0, 2.0).unwrap().requires_smooth);
        assert!(!OracleMeta::new(0.5, 0.0, 1.0, 0.0).unwrap().requires_smooth);
    }

    #[test]
    fn learning_rate_uses_three_quarter_power() {
        // K = 256 → K^{3/4} = 64
        assert_eq!(Ocg::learning_rate(2.0, 0.5, 256), 2.0 / (2.0 * 0.5 * 64.0));
    }

    #[test]
    fn step_sizes() {
        assert_eq!(Ocg::step_size(1), 1.0);
        assert!((Ocg::step_size(9) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn reset_checks() {
        let d = DomainSpec::cube(2, 0.0, 1.0).unwrap();
        let b = bounds(2, true);
        let make = |x0: Vec<f64>, bounds: &ProblemBounds, f: &dyn OracleFactory| {
            oracle_reset(
                f,
                OracleReset {
                    domain: &d,
                    x0: Point::new(x0).unwrap(),
                    horizon: 4,
                    bounds,
                    grad_bound: 1.0,
                    rng: rng::stream(0, "o"),
                },
            )
        };
        assert!(make(vec![0.5, 0.5], &b, &Ocg).is_ok());
        assert!(matches!(make(vec![2.0, 0.5], &b, &Ocg), Err(Error::Infeasible { .. })));
        assert!(matches!(make(vec![0.5, 0.5], &bounds(2, false), &SmoothOnly), Err(Error::Config(_))));
        assert!(make(vec![0.5, 0.5], &bounds(2, false), &Ocg).is_ok());
    }

    #[test]
    fn reset_twice_gives_identical_trajectories() {
        let d = DomainSpec::nuclear_ball(3, 3, 1.0).unwrap();
        let b = bounds(9, true);
        let run = || {
            let mut o = oracle_reset(
                &Ocg,
                OracleReset {
                    domain: &d,
                    x0: d.canonical_point(),
                    horizon: 8,
                    bounds: &b,
                    grad_bound: 1.0,
                    rng: rng::stream(11, "o"),
                },
            )
            .unwrap();
            let g = Point::matrix(3, 3, (0..9).map(|i| i as f64 - 4.0).collect()).unwrap();
            (0..3).map(|_| o.step(&g).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn first_step_jumps_to_vertex() {
        let d = DomainSpec::cube(2, 0.0, 1.0).unwrap();
        let mut o = OcgState::new(d, Point::new(vec![0.5, 0.5]).unwrap(), 1.0, rng::stream(0, "o"));
        let x = o.step(&Point::new(vec![1.0, -1.0]).unwrap()).unwrap();
        assert_eq!(x.as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn audit_single_round_at_optimum_is_zero() {
        let d = DomainSpec::cube(2, 0.0, 1.0).unwrap();
        let h: Arc<dyn RoundFn> = Arc::new(Linear {
            coef: vec![1.0, -1.0],
            offset: 0.0,
        });
        let x = Point::new(vec![0.0, 1.0]).unwrap();
        let audit = regret_audit(&[h], &[x], &d, 100, 10, 0).unwrap();
        assert!(audit.regret.abs() < 1e-12);
    }

    #[test]
    fn audit_length_mismatch() {
        let d = DomainSpec::cube(1, 0.0, 1.0).unwrap();
        assert!(regret_audit(&[], &[Point::zeros(1)], &d, 1, 0, 0).is_err());
    }
}
