//! Regret against the best fixed point in hindsight.

use pfol_core::baselines::best_in_hindsight;
use pfol_core::losses::Loss;
use pfol_core::{FeasibleSet, LossSequence, QuadraticLoss, RunTrace};

use crate::error::{HarnessError, Result};

/// `f(a) - f(b)` for an isotropic quadratic, written as
/// `<grad f(b), a - b> + (alpha/2) ||a - b||^2` so that nearly equal values do
/// not cancel.
pub fn loss_difference(loss: &QuadraticLoss, a: &[f64], b: &[f64]) -> Result<f64> {
    let g = loss.gradient(b)?;
    let mut lin = 0.0;
    let mut sq = 0.0;
    for ((ai, bi), gi) in a.iter().zip(b).zip(g.as_slice()) {
        let d = ai - bi;
        lin += gi * d;
        sq += d * d;
    }
    Ok(lin + 0.5 * loss.alpha() * sq)
}

/// `sum_t f_t(play_t) - min_{x in set} sum_t f_t(x)`, summed round by round
/// as differences against the hindsight minimizer. For bandit runs the plays
/// are the perturbed points actually queried.
pub fn compute_regret(trace: &RunTrace, losses: &LossSequence, set: &FeasibleSet) -> Result<f64> {
    if trace.len() != losses.len() {
        return Err(HarnessError::Config(format!(
            "trace has {} rounds but the sequence has {} losses",
            trace.len(),
            losses.len()
        )));
    }
    let (x_star, _) = best_in_hindsight(losses.losses(), set)?;
    let mut total = 0.0;
    for (round, loss) in trace.rounds.iter().zip(losses.losses()) {
        total += loss_difference(loss, &round.play, &x_star)?;
    }
    Ok(total)
}

/// Regret from the loss values stored in the trace, without the per-round
/// difference form. Used as an independent cross-check.
pub fn regret_from_recorded_losses(trace: &RunTrace, losses: &LossSequence, set: &FeasibleSet) -> Result<f64> {
    if trace.len() != losses.len() {
        return Err(HarnessError::Config(format!(
            "trace has {} rounds but the sequence has {} losses",
            trace.len(),
            losses.len()
        )));
    }
    let (_, best) = best_in_hindsight(losses.losses(), set)?;
    Ok(trace.total_loss() - best)
}
