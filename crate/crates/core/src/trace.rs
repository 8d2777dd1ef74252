//! Per-round run records shared by every online algorithm.

use serde::{Deserialize, Serialize};

use crate::geometry::Vector;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    /// The point played this round (`y_t` for bandit runs).
    pub play: Vector,
    /// Loss incurred at the play.
    pub loss: f64,
    /// Norm of the gradient (or gradient estimate) consumed this round.
    pub grad_norm: f64,
    /// Step size taken after the round; zero for methods without one.
    pub sigma: f64,
    /// Cumulative linear-oracle calls after the round.
    pub lmo_calls: u64,
    /// `F_t(x_t) - F_t(x_t^*)`, recorded only in verification mode.
    pub suboptimality: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub rounds: Vec<RoundRecord>,
    pub lmo_calls: u64,
    pub projections: u64,
}

impl RunTrace {
    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn plays(&self) -> impl Iterator<Item = &Vector> {
        self.rounds.iter().map(|r| &r.play)
    }

    pub fn total_loss(&self) -> f64 {
        self.rounds.iter().map(|r| r.loss).sum()
    }
}
