//! Projection-free online convex optimization for strongly convex losses.
//!
//! The crate implements Online Frank-Wolfe (one linear optimization step per
//! round) in the full-information setting, its block-structured bandit
//! variant driven by one-point spherical gradient estimates, and the exact
//! comparators (projected OGD, exact RFTL, best fixed point in hindsight)
//! needed to measure regret.
//!
//! Everything is built on a small set of closed-form primitives:
//!
//! * [`geometry`]: feasible sets with exact linear optimization oracles and
//!   projections, plus a portable seeded generator for sphere/ball sampling.
//! * [`losses`]: isotropic quadratic losses with certified bounds, oblivious
//!   adversaries and the smoothing identities used by bandit estimators.
//! * [`objective`]: the accumulated regularized objective in `O(n)` memory.
//! * [`fw_solver`]: Frank-Wolfe with a duality-gap stopping rule.
//! * [`ofw_full`] and [`ofw_bandit`]: the two online algorithms.
//! * [`baselines`]: projection-based and exact comparators.

pub mod baselines;
pub mod error;
pub mod fw_solver;
pub mod geometry;
pub mod losses;
pub mod objective;
pub mod ofw_bandit;
pub mod ofw_full;
pub mod trace;

pub use error::{Error, Result};
pub use geometry::{FeasibleSet, Rng, SetKind, Vector};
pub use losses::{LossBounds, LossSequence, QuadraticLoss};
pub use objective::RftlObjective;
pub use trace::{RoundRecord, RunTrace};
