//! Follow-The-Perturbed-Leader for online linear optimization over a domain.
//!
//! A single uniform perturbation `p ∈ [0, 1/δ]^d` is drawn at construction and
//! kept for the whole run; each selection is `lmo(p + Σ w_s)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domains::DomainSpec;
use crate::error::{Error, Result};
use crate::point::Point;
use crate::rng::Stream;

/// Which observed coefficients enter the next selection.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HistoryIndex {
    /// Selection after observing rounds `1..=t` uses all of them.
    #[default]
    Full,
    /// Selection after observing rounds `1..=t` uses only `1..t` (one-round lag).
    Lagged,
}

#[derive(Clone, Debug)]
pub struct FtplState {
    perturbation: Point,
    accumulated: Point,
    pending: Option<Point>,
    delta: f64,
    history: HistoryIndex,
    domain: DomainSpec,
    rng: Stream,
}

impl FtplState {
    /// Draws `p ~ Uniform[0, 1/δ]^d` from `rng`; the same stream then drives
    /// the LMO's power-iteration starts.
    pub fn new(domain: DomainSpec, delta: f64, history: HistoryIndex, mut rng: Stream) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!("FTPL delta must be positive, got {delta}")));
        }
        let scale = 1.0 / delta;
        let p: Vec<f64> = (0..domain.dim()).map(|_| scale * rng.random::<f64>()).collect();
        let shape = domain.shape();
        Ok(Self {
            perturbation: Point::from_raw(p, shape),
            accumulated: Point::from_raw(vec![0.0; domain.dim()], shape),
            pending: None,
            delta,
            history,
            domain,
            rng,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn perturbation(&self) -> &Point {
        &self.perturbation
    }

    pub fn accumulated(&self) -> &Point {
        &self.accumulated
    }

    /// The perturbed leader `lmo(p + Σ w_s)`.
    pub fn select(&mut self) -> Result<Point> {
        let mut w = self.perturbation.clone();
        w.axpy(1.0, &self.accumulated);
        self.domain.lmo(&w, &mut self.rng)
    }

    pub fn observe(&mut self, w: Point) -> Result<()> {
        if w.len() != self.accumulated.len() {
            return Err(Error::DimensionMismatch {
                expected: self.accumulated.len(),
                got: w.len(),
            });
        }
        if !w.is_finite() {
            return Err(Error::NonFinite {
                what: "FTPL coefficient".into(),
            });
        }
        match self.history {
            HistoryIndex::Full => self.accumulated.axpy(1.0, &w),
            HistoryIndex::Lagged => {
                if let Some(prev) = self.pending.replace(w) {
                    self.accumulated.axpy(1.0, &prev);
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn unit_box() -> DomainSpec {
        DomainSpec::cube(1, 0.0, 1.0).unwrap()
    }

    fn pt(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    #[test]
    fn perturbation_range_and_determinism() {
        let d = DomainSpec::cube(4, 0.0, 1.0).unwrap();
        // D=1, d=4, T=16, β=0: δ = 1/(2·1·2·4) = 1/16.
        let delta = 1.0 / 16.0;
        let a = FtplState::new(d.clone(), delta, HistoryIndex::Full, rng::stream(5, "f")).unwrap();
        let b = FtplState::new(d.clone(), delta, HistoryIndex::Full, rng::stream(5, "f")).unwrap();
        assert_eq!(a.perturbation(), b.perturbation());
        assert!(a.perturbation().as_slice().iter().all(|&v| (0.0..=16.0).contains(&v)));
        let c = FtplState::new(d, 1.0, HistoryIndex::Full, rng::stream(5, "f")).unwrap();
        assert!(c.perturbation().as_slice().iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn rejects_non_positive_delta() {
        assert!(FtplState::new(unit_box(), 0.0, HistoryIndex::Full, rng::stream(0, "f")).is_err());
    }

    #[test]
    fn selection_follows_total_coefficient_sign() {
        let mut s = FtplState::new(unit_box(), 1.0 / 16.0, HistoryIndex::Full, rng::stream(1, "f")).unwrap();
        assert_eq!(s.select().unwrap().as_slice(), &[0.0]);
        s.observe(pt(&[5.0])).unwrap();
        assert_eq!(s.select().unwrap().as_slice(), &[0.0]);
        s.observe(pt(&[-25.0])).unwrap();
        // accumulated = −20 and p ≤ 16
        assert_eq!(s.select().unwrap().as_slice(), &[1.0]);
    }

    #[test]
    fn observe_accumulates() {
        let d = DomainSpec::cube(2, 0.0, 1.0).unwrap();
        let mut s = FtplState::new(d, 1.0, HistoryIndex::Full, rng::stream(2, "f")).unwrap();
        s.observe(pt(&[0.0, 0.0])).unwrap();
        assert_eq!(s.accumulated().as_slice(), &[0.0, 0.0]);
        s.observe(pt(&[1.0, 0.0])).unwrap();
        s.observe(pt(&[2.0, -1.0])).unwrap();
        assert_eq!(s.accumulated().as_slice(), &[3.0, -1.0]);
        s.observe(pt(&[-2.0, 1.0])).unwrap();
        assert_eq!(s.accumulated().as_slice(), &[1.0, 0.0]);
        assert!(s.observe(pt(&[f64::MAX, 0.0]).scaled(10.0)).is_err());
    }

    #[test]
    fn lagged_history_delays_by_one_round() {
        let d = DomainSpec::cube(1, 0.0, 1.0).unwrap();
        let mut s = FtplState::new(d, 1.0, HistoryIndex::Lagged, rng::stream(3, "f")).unwrap();
        s.observe(pt(&[1.0])).unwrap();
        assert_eq!(s.accumulated().as_slice(), &[0.0]);
        s.observe(pt(&[2.0])).unwrap();
        assert_eq!(s.accumulated().as_slice(), &[1.0]);
    }
}
