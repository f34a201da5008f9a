//! Built-in online problems and the offline benchmark solver.

mod benchmark;
mod matrix_completion;
mod quadratic;
pub mod tape;

use std::sync::Arc;

pub use benchmark::{benchmark_solve, BenchmarkOptions, BenchmarkSolution};
pub use matrix_completion::{MatrixCompletionInstance, MatrixLoss, McRound};
pub use quadratic::{ConstraintFamily, QuadraticLoss, StochasticQuadraticInstance};

use crate::domains::DomainSpec;
use crate::functions::{ProblemBounds, RoundFn, RoundFunctions};
use crate::point::Point;

/// The expected constraint `ḡ(x) = E_ω[g(x, ω)]`.
#[derive(Clone)]
pub enum MeanConstraint {
    /// `ḡ ≡ 0`: every point of the domain is feasible for the benchmark.
    Zero,
    Known(Arc<dyn RoundFn>),
}

/// A stochastic online problem with a fixed domain and known constants.
pub trait OnlineProblem: Send + Sync {
    fn name(&self) -> &'static str;

    fn domain(&self) -> &DomainSpec;

    fn bounds(&self) -> ProblemBounds;

    fn mean_constraint(&self) -> MeanConstraint;

    /// Rounds `1..=horizon`, identical for every call with the same instance.
    fn rounds(&self, horizon: usize) -> Vec<RoundFunctions>;

    fn initial_point(&self) -> Point {
        self.domain().canonical_point()
    }
}
