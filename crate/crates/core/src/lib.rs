//! Projection-free online convex optimization with stochastic long-term
//! constraints.
//!
//! Two online algorithms share one protocol: at round `t` the learner plays
//! `x_t`, then the loss `f_t` and constraint `g_t` are revealed. The goal is
//! sublinear regret against the best fixed point satisfying the expected
//! constraint, together with sublinear cumulative constraint value.
//!
//! - [`alg1`]: a blocked primal-dual framework that wraps any online oracle
//!   (Online Conditional Gradient ships as [`oracle::Ocg`]).
//! - [`pdmfw`]: Primal-Dual Meta-Frank-Wolfe, driven by FTPL learners ([`ftpl`]).
//!
//! Both touch the domain only through linear minimization ([`domains`]).

pub mod acceptance;
pub mod alg1;
pub mod audit;
pub mod domains;
pub mod error;
pub mod ftpl;
pub mod functions;
pub mod fw;
pub mod harness;
pub mod metrics;
pub mod oracle;
pub mod pdmfw;
pub mod point;
pub mod problems;
pub mod rng;

pub use domains::DomainSpec;
pub use error::{Error, Result};
pub use functions::{DualState, ProblemBounds, RoundFn, RoundFunctions, Smoothness};
pub use metrics::{RoundRecord, RunLog};
pub use point::Point;
