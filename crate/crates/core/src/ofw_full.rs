//! Full-information Online Frank-Wolfe for strongly convex losses.
//!
//! Each round plays `x_t`, adds the linearized loss plus an `alpha/2`
//! proximal term at `x_t` to the accumulated objective, and takes a single
//! Frank-Wolfe step with exact line search on the updated objective. With
//! the schedule below, `x_t` stays within `eps_t = b alpha (t + T0)^{1/3}`
//! of the exact RFTL minimizer in objective value.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::FeasibleSet;
use crate::losses::{Loss, LossSequence, ValueOracle};
use crate::objective::RftlObjective;
use crate::trace::{RoundRecord, RunTrace};

const FEASIBILITY_TOL: f64 = 1e-9;

/// Which closed form to use for the schedule constant `b`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BConstant {
    /// `max{2((G+2R alpha)/alpha)^2, (64 (G+2R alpha) R^2 / alpha)^{2/3}}`,
    /// the constant under which the per-round gap guarantee is proven.
    #[default]
    GapGuarantee,
    /// `max{((G+2R alpha)/alpha)^2, 8 (2R)^2 (G+2R alpha) / alpha}`, the
    /// constant quoted alongside the regret bound.
    RegretStatement,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleParams {
    pub b: f64,
    pub t0: f64,
}

/// Schedule constants for losses with gradient bound `g` over a set of outer
/// radius `r`: `b` from [`BConstant::GapGuarantee`] and
/// `T0 = max{1, 2 (G+2R alpha) sqrt(b) / (alpha R^2)}`.
pub fn full_info_params(g: f64, r: f64, alpha: f64) -> ScheduleParams {
    schedule_params(g, r, alpha, BConstant::GapGuarantee)
}

pub fn schedule_params(g: f64, r: f64, alpha: f64, constant: BConstant) -> ScheduleParams {
    let lip = g + 2.0 * r * alpha;
    let b = match constant {
        BConstant::GapGuarantee => f64::max(
            2.0 * (lip / alpha).powi(2),
            (64.0 * lip * r * r / alpha).powf(2.0 / 3.0),
        ),
        BConstant::RegretStatement => f64::max((lip / alpha).powi(2), 8.0 * 4.0 * r * r * lip / alpha),
    };
    let t0 = f64::max(1.0, 2.0 * lip * b.sqrt() / (alpha * r * r));
    ScheduleParams { b, t0 }
}

/// `eps_t = b alpha (t + T0)^{1/3}`.
pub fn epsilon_schedule(t: u64, b: f64, t0: f64, alpha: f64) -> f64 {
    b * alpha * (t as f64 + t0).cbrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OfwConfig {
    pub alpha: f64,
    pub t0: f64,
    /// Schedule constant; only used to report `eps_t`, the algorithm itself
    /// depends on `alpha` and `T0` alone.
    pub b: f64,
    /// Record `F_t(x_t) - F_t(x_t^*)` every round (one projection each).
    pub record_suboptimality: bool,
}

impl OfwConfig {
    /// Schedule derived from the sequence's certified gradient bound and the
    /// set's outer radius.
    pub fn auto(losses: &LossSequence, set: &FeasibleSet, constant: BConstant) -> Self {
        let bounds = losses.bounds();
        let p = schedule_params(bounds.gradient_bound, set.outer_radius(), bounds.alpha, constant);
        OfwConfig {
            alpha: bounds.alpha,
            t0: p.t0,
            b: p.b,
            record_suboptimality: false,
        }
    }

    pub fn manual(alpha: f64, t0: f64, b: f64) -> Result<Self> {
        let cfg = OfwConfig {
            alpha,
            t0,
            b,
            record_suboptimality: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_suboptimality(mut self, record: bool) -> Self {
        self.record_suboptimality = record;
        self
    }

    pub fn epsilon(&self, t: u64) -> f64 {
        epsilon_schedule(t, self.b, self.t0, self.alpha)
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::Parameter(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.t0.is_finite() && self.t0 >= 1.0) {
            return Err(Error::Parameter(format!("T0 must be at least 1, got {}", self.t0)));
        }
        if !(self.b.is_finite() && self.b > 0.0) {
            return Err(Error::Parameter(format!("b must be positive, got {}", self.b)));
        }
        Ok(())
    }
}

pub(crate) fn check_alpha(config_alpha: f64, losses: &LossSequence) -> Result<()> {
    let a = losses.alpha();
    if (a - config_alpha).abs() > 1e-12 * a.abs().max(config_alpha.abs()) {
        return Err(Error::Usage(format!(
            "configured alpha {config_alpha} does not match the losses' alpha {a}"
        )));
    }
    Ok(())
}

pub(crate) fn check_start(set: &FeasibleSet, x1: &[f64]) -> Result<()> {
    check_dim(set.dim(), x1.len())?;
    if !set.contains(x1, FEASIBILITY_TOL) {
        return Err(Error::Usage("starting point is not in the feasible set".into()));
    }
    Ok(())
}

/// Runs the online algorithm over the whole sequence, one LMO call per round.
pub fn run(losses: &LossSequence, set: &FeasibleSet, config: &OfwConfig, x1: &[f64]) -> Result<RunTrace> {
    config.validate()?;
    check_alpha(config.alpha, losses)?;
    check_start(set, x1)?;

    let mut obj = RftlObjective::fresh(config.alpha, config.t0, x1)?;
    let mut x = crate::geometry::Vector::from(x1);
    let mut rounds = Vec::with_capacity(losses.len());
    let mut lmo_calls = 0u64;
    for (t, loss) in losses.losses().iter().enumerate() {
        if !set.contains(&x, FEASIBILITY_TOL) {
            return Err(Error::InvariantViolation(format!(
                "play at round {} left the set",
                t + 1
            )));
        }
        let suboptimality = if config.record_suboptimality {
            Some(obj.suboptimality(set, &x)?)
        } else {
            None
        };
        let value = loss.value(&x)?;
        let grad = loss.gradient(&x)?;
        obj.accumulate(&grad, &x, 1.0)?;
        let v = set.lmo(&obj.gradient(&x))?;
        lmo_calls += 1;
        let (sigma, next) = obj.line_search_step(&x, &v);
        rounds.push(RoundRecord {
            play: x,
            loss: value,
            grad_norm: grad.norm(),
            sigma,
            lmo_calls,
            suboptimality,
        });
        x = next;
    }
    Ok(RunTrace {
        rounds,
        lmo_calls,
        projections: 0,
    })
}

/// The closed-form regret bound for horizon `T` under the default schedule.
pub fn full_info_regret_bound(g: f64, r: f64, alpha: f64, horizon: u64) -> f64 {
    let lip = g + 2.0 * r * alpha;
    let t = horizon as f64;
    let t23 = t.powf(2.0 / 3.0);
    4.0 * lip * lip / alpha * t.ln()
        + 2.0 * alpha * r * r
        + 10.0 * lip * lip / alpha
        + 16.0 * lip.powf(4.0 / 3.0) * r.powf(2.0 / 3.0) / alpha.cbrt()
        + 4.0 * g * (lip / alpha) * t23
        + 8.0 * 2f64.sqrt() * lip.cbrt() * r.powf(2.0 / 3.0) / alpha.cbrt() * t23
}

/// Regret bound in terms of the per-round gap schedule:
/// `2 (G+2R alpha)^2/alpha (1 + ln T) + 2 alpha R^2 T0
///  + G sum_t sqrt(2 eps_t / (alpha (t - 1 + T0)))`.
pub fn regret_decomposition_bound(g: f64, r: f64, alpha: f64, params: ScheduleParams, horizon: u64) -> f64 {
    let lip = g + 2.0 * r * alpha;
    let t = horizon as f64;
    let gap_sum: f64 = (1..=horizon)
        .map(|s| {
            let eps = epsilon_schedule(s, params.b, params.t0, alpha);
            (2.0 * eps / (alpha * (s as f64 - 1.0 + params.t0))).sqrt()
        })
        .sum();
    2.0 * lip * lip / alpha * (1.0 + t.ln()) + 2.0 * alpha * r * r * params.t0 + g * gap_sum
}

/// Bound on `||x_t^* - x_{t+1}^*||` between consecutive exact minimizers.
pub fn minimizer_drift_bound(g: f64, r: f64, alpha: f64, t0: f64, t: u64) -> f64 {
    2.0 * (g + 2.0 * r * alpha) / ((t as f64 + t0) * alpha)
}
