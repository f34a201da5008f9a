//! Online matrix completion over a nuclear-norm ball with a random linear
//! long-term constraint.
//!
//! Round `t` reveals `b` entries `B_t` of a hidden matrix `M` (`‖M‖_* = 1`):
//! `f_t(X) = ½ Σ_{(i,j)∈B_t} (X_ij − M_ij)²` and `g_t(X) = ⟨G^t, X⟩` with
//! `G^t ~ Uniform[−1, 1]^{m×n}`, so `ḡ ≡ 0`.
//!
//! Constants on `{‖X‖_* ≤ k}`:
//! - `|X_ij| ≤ ‖X‖_op ≤ k` and `|M_ij| ≤ 1`, so `‖∇f_t‖_∞ ≤ k + max|M_ij|`;
//!   `‖∇f_t‖_2 ≤ ‖X‖_F + ‖M‖_F ≤ k + ‖M‖_F`.
//! - `‖∇g_t‖_∞ ≤ 1`, `‖∇g_t‖_2 ≤ √(mn)`.
//! - `|g_t(X)| ≤ ‖G^t‖_F‖X‖_F ≤ k√(mn)`.
//! - `f_t` has a 0/1 diagonal Hessian and `g_t` is linear: `L = 1`.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{MeanConstraint, OnlineProblem};
use crate::domains::{nuclear_norm, DomainSpec};
use crate::error::{Error, Result};
use crate::functions::{Linear, ProblemBounds, RoundFn, RoundFunctions, Smoothness};
use crate::point::Point;
use crate::rng::{self, Stream};

/// Rank of the random factors used to build `M`.
const TARGET_RANK: usize = 5;

#[derive(Clone, Debug)]
pub struct MatrixCompletionInstance {
    pub rows: usize,
    pub cols: usize,
    pub radius: f64,
    pub batch: usize,
    pub seed: u64,
    target: Arc<Vec<f64>>,
    domain: DomainSpec,
}

/// Raw randomness of one round: revealed flat indices (sorted) and `G^t`.
#[derive(Clone, Debug, PartialEq)]
pub struct McRound {
    pub entries: Vec<usize>,
    pub g: Vec<f64>,
}

impl MatrixCompletionInstance {
    /// Draws `M = A Bᵀ` (standard-normal factors of rank ≤ 5) and rescales it to unit nuclear norm.
    pub fn generate(rows: usize, cols: usize, radius: f64, batch: usize, seed: u64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter("matrix dimensions must be >= 1".into()));
        }
        if !(radius >= 1.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("radius k must be >= 1, got {radius}")));
        }
        if batch == 0 || batch > rows * cols {
            return Err(Error::InvalidParameter(format!(
                "batch size b must lie in [1, {}], got {batch}",
                rows * cols
            )));
        }
        let mut rng = rng::stream(seed, "mc-target");
        let rank = TARGET_RANK.min(rows).min(cols);
        let a = DMatrix::<f64>::from_fn(rows, rank, |_, _| StandardNormal.sample(&mut rng));
        let b = DMatrix::<f64>::from_fn(cols, rank, |_, _| StandardNormal.sample(&mut rng));
        let product = a * b.transpose();
        let mut target: Vec<f64> = (0..rows)
            .flat_map(|i| (0..cols).map(move |j| (i, j)))
            .map(|(i, j)| product[(i, j)])
            .collect();
        let nn = nuclear_norm(&target, rows, cols);
        target.iter_mut().for_each(|v| *v /= nn);
        Self::from_target(rows, cols, radius, batch, seed, target)
    }

    pub(crate) fn from_target(
        rows: usize,
        cols: usize,
        radius: f64,
        batch: usize,
        seed: u64,
        target: Vec<f64>,
    ) -> Result<Self> {
        if target.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: target.len(),
            });
        }
        Ok(Self {
            rows,
            cols,
            radius,
            batch,
            seed,
            target: Arc::new(target),
            domain: DomainSpec::nuclear_ball(rows, cols, radius)?,
        })
    }

    pub fn target(&self) -> Point {
        Point::from_raw(self.target.as_ref().clone(), Some((self.rows, self.cols)))
    }

    /// Draws `B_t` (a uniform size-`b` subset, without replacement) and `G^t`.
    pub fn sample_round_data<R: Rng + ?Sized>(&self, rng: &mut R) -> McRound {
        let mut entries = index::sample(rng, self.rows * self.cols, self.batch).into_vec();
        entries.sort_unstable();
        let g = (0..self.rows * self.cols)
            .map(|_| rng.random_range(-1.0..=1.0))
            .collect();
        McRound { entries, g }
    }

    pub fn round_from_data(&self, t: usize, data: McRound) -> RoundFunctions {
        let loss = MatrixLoss {
            entries: data.entries,
            target: self.target.clone(),
        };
        let constraint = Linear {
            coef: data.g,
            offset: 0.0,
        };
        RoundFunctions::new(t, Arc::new(loss), Arc::new(constraint))
    }

    pub fn sample_round<R: Rng + ?Sized>(&self, t: usize, rng: &mut R) -> RoundFunctions {
        let data = self.sample_round_data(rng);
        self.round_from_data(t, data)
    }

    pub(crate) fn round_stream(&self) -> Stream {
        rng::stream(self.seed, "mc-rounds")
    }

    /// Raw data of rounds `1..=horizon`.
    pub fn round_data(&self, horizon: usize) -> Vec<McRound> {
        let mut rng = self.round_stream();
        (0..horizon).map(|_| self.sample_round_data(&mut rng)).collect()
    }
}

impl OnlineProblem for MatrixCompletionInstance {
    fn name(&self) -> &'static str {
        "matrix_completion"
    }

    fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    fn bounds(&self) -> ProblemBounds {
        let k = self.radius;
        let mn = (self.rows * self.cols) as f64;
        let max_abs = self.target.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let frob = self.target.iter().map(|v| v * v).sum::<f64>().sqrt();
        ProblemBounds {
            grad_l2: (k + frob).max(mn.sqrt()),
            grad_inf: (k + max_abs).max(1.0),
            smoothness: Smoothness::Smooth(1.0),
            constraint_bound: k * mn.sqrt(),
            diameter_l1: self.domain.diameter(),
            diameter_l2: self.domain.diameter_l2(),
            dim: self.rows * self.cols,
        }
    }

    fn mean_constraint(&self) -> MeanConstraint {
        MeanConstraint::Zero
    }

    fn rounds(&self, horizon: usize) -> Vec<RoundFunctions> {
        self.round_data(horizon)
            .into_iter()
            .enumerate()
            .map(|(i, data)| self.round_from_data(i + 1, data))
            .collect()
    }
}

/// `½ Σ_{idx ∈ entries} (x[idx] − target[idx])²`.
#[derive(Clone, Debug)]
pub struct MatrixLoss {
    pub entries: Vec<usize>,
    pub target: Arc<Vec<f64>>,
}

impl RoundFn for MatrixLoss {
    fn value(&self, x: &Point) -> f64 {
        let x = x.as_slice();
        0.5 * self
            .entries
            .iter()
            .map(|&i| (x[i] - self.target[i]).powi(2))
            .sum::<f64>()
    }

    fn add_gradient(&self, x: &Point, scale: f64, out: &mut [f64]) {
        let x = x.as_slice();
        for &i in &self.entries {
            out[i] += scale * (x[i] - self.target[i]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn target_has_unit_nuclear_norm_and_is_feasible() {
        let inst = MatrixCompletionInstance::generate(12, 9, 5.0, 20, 3).unwrap();
        let m = inst.target();
        assert!((nuclear_norm(m.as_slice(), 12, 9) - 1.0).abs() < 1e-9);
        assert!(inst.domain().contains(&m, 1e-9).unwrap());
    }

    #[test]
    fn parameter_validation() {
        assert!(MatrixCompletionInstance::generate(4, 4, 1.0, 17, 0).is_err());
        assert!(MatrixCompletionInstance::generate(4, 4, 1.0, 0, 0).is_err());
        assert!(MatrixCompletionInstance::generate(4, 4, 0.5, 2, 0).is_err());
    }

    #[test]
    fn rounds_reveal_exactly_b_distinct_entries() {
        let inst = MatrixCompletionInstance::generate(6, 7, 2.0, 10, 8).unwrap();
        for data in inst.round_data(20) {
            assert_eq!(data.entries.len(), 10);
            assert!(data.entries.windows(2).all(|w| w[0] < w[1]));
            assert!(data.g.iter().all(|v| (-1.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn loss_vanishes_at_target() {
        let inst = MatrixCompletionInstance::generate(5, 5, 2.0, 7, 1).unwrap();
        let m = inst.target();
        for rf in inst.rounds(5) {
            assert_eq!(rf.loss_value(&m), 0.0);
            assert!(rf.loss.gradient(&m).as_slice().iter().all(|v| *v == 0.0));
            assert_eq!(rf.constraint_value(&Point::zeros_like(&m)), 0.0);
        }
    }

    #[test]
    fn two_by_two_hand_evaluation() {
        let inst = MatrixCompletionInstance::from_target(2, 2, 1.0, 1, 0, vec![0.5, 0.0, 0.0, 0.0]).unwrap();
        let rf = inst.round_from_data(
            1,
            McRound {
                entries: vec![0],
                g: vec![0.0; 4],
            },
        );
        let x = Point::matrix(2, 2, vec![1.5, 0.3, -0.2, 0.9]).unwrap();
        assert!((rf.loss_value(&x) - 0.5).abs() < 1e-15);
        assert_eq!(rf.loss.gradient(&x).as_slice(), &[1.0, 0.0, 0.0, 0.0]);
    }
}
