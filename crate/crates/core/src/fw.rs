//! Offline Frank-Wolfe with the open-loop step `γ_k = 2/(k+1)`.

use crate::domains::DomainSpec;
use crate::error::Result;
use crate::functions::RoundFn;
use crate::point::Point;
use crate::rng::Stream;

/// `γ_k = 2/(k+1)` for `k ≥ 1`.
#[inline]
pub fn step_size(k: usize) -> f64 {
    2.0 / (k as f64 + 1.0)
}

#[derive(Clone, Debug)]
pub struct FwOutcome {
    /// Iterate with the smallest objective value seen.
    pub best: Point,
    pub best_value: f64,
    /// Duality gap `⟨∇F(x), x − v⟩` at `best`.
    pub gap: f64,
    pub last: Point,
    /// Objective value after each step, `values[0]` at the start point.
    pub values: Vec<f64>,
}

/// Runs `iters` Frank-Wolfe steps on `objective` from `start`.
///
/// Stops early once the duality gap at the current iterate is at most `tol`.
pub fn minimize(
    objective: &dyn RoundFn,
    domain: &DomainSpec,
    start: Point,
    iters: usize,
    tol: f64,
    rng: &mut Stream,
) -> Result<FwOutcome> {
    let mut x = start;
    let mut value = objective.value(&x);
    let mut values = vec![value];
    let mut best = x.clone();
    let mut best_value = value;
    let mut best_gap = f64::INFINITY;

    for k in 1..=iters {
        let grad = objective.gradient(&x);
        let v = domain.lmo(&grad, rng)?;
        let gap = grad.dot(&x) - grad.dot(&v);
        if value <= best_value {
            best_gap = gap;
        }
        if gap <= tol {
            break;
        }
        x.step_toward(&v, step_size(k));
        value = objective.value(&x);
        values.push(value);
        if value < best_value {
            best_value = value;
            best = x.clone();
            best_gap = f64::INFINITY;
        }
    }
    if !best_gap.is_finite() {
        let grad = objective.gradient(&best);
        let v = domain.lmo(&grad, rng)?;
        best_gap = grad.dot(&best) - grad.dot(&v);
    }
    Ok(FwOutcome {
        best,
        best_value,
        gap: best_gap.max(0.0),
        last: x,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::FnRound;
    use crate::rng;

    #[test]
    fn first_step_is_full() {
        assert_eq!(step_size(1), 1.0);
        assert!((step_size(3) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn boundary_minimizer_on_interval() {
        // min (x − 2)² over [0, 1]
        let f = FnRound::new(|x: &[f64]| (x[0] - 2.0).powi(2), |x: &[f64]| vec![2.0 * (x[0] - 2.0)]);
        let d = DomainSpec::cube(1, 0.0, 1.0).unwrap();
        let out = minimize(&f, &d, Point::zeros(1), 100, 1e-12, &mut rng::stream(0, "fw")).unwrap();
        assert_eq!(out.best.as_slice(), &[1.0]);
        assert!(out.gap <= 1e-12);
    }
}
