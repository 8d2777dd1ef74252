//! Invariant checks over finished runs.
//!
//! Every check recomputes what it needs from the raw plays and the loss
//! sequence instead of trusting values recorded by the algorithm. Each check
//! reports its worst margin `observed - allowed` (nonpositive when it holds)
//! and the 1-based round or block where that margin occurs.

use std::fmt;

use pfol_core::fw_solver::iteration_bound;
use pfol_core::geometry::distance;
use pfol_core::losses::{Loss, ValueOracle};
use pfol_core::ofw_bandit::{self, BanditConfig, BlockRecord};
use pfol_core::ofw_full::{self, OfwConfig, ScheduleParams};
use pfol_core::{FeasibleSet, LossSequence, RftlObjective, RunTrace, Vector};
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Slack for the per-round tolerance comparisons.
pub const GAP_SLACK: f64 = 1e-6;
/// Slack for membership and exact-identity comparisons.
pub const POINT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub worst_margin: f64,
    pub worst_index: Option<u64>,
    pub first_failure: Option<u64>,
    pub evaluated: u64,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {} (worst margin {:.3e}", self.name, self.worst_margin)?;
        if let Some(i) = self.worst_index {
            write!(f, " at {i}")?;
        }
        if let Some(i) = self.first_failure {
            write!(f, ", first failure at {i}")?;
        }
        write!(f, ", {} evaluated)", self.evaluated)
    }
}

/// Accumulates `observed - allowed` margins for one named check.
struct Tracker {
    name: &'static str,
    worst: f64,
    worst_index: Option<u64>,
    first_failure: Option<u64>,
    evaluated: u64,
}

impl Tracker {
    fn new(name: &'static str) -> Self {
        Tracker {
            name,
            worst: f64::NEG_INFINITY,
            worst_index: None,
            first_failure: None,
            evaluated: 0,
        }
    }

    fn observe(&mut self, index: u64, observed: f64, allowed: f64) {
        let margin = observed - allowed;
        self.evaluated += 1;
        let failed = margin.is_nan() || margin > 0.0;
        if failed && self.first_failure.is_none() {
            self.first_failure = Some(index);
        }
        let worse = self.worst_index.is_none() || margin > self.worst || (margin.is_nan() && !self.worst.is_nan());
        if worse {
            self.worst = margin;
            self.worst_index = Some(index);
        }
    }

    fn finish(self) -> Check {
        Check {
            name: self.name.to_string(),
            passed: self.first_failure.is_none(),
            worst_margin: if self.evaluated == 0 { 0.0 } else { self.worst },
            worst_index: self.worst_index,
            first_failure: self.first_failure,
            evaluated: self.evaluated,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Distance from `x` to `set`, via the projection oracle.
fn infeasibility(set: &FeasibleSet, x: &[f64]) -> f64 {
    distance(x, &set.project(x))
}

fn feasibility_check<'a>(set: &FeasibleSet, plays: impl Iterator<Item = &'a Vector>) -> Check {
    let mut tr = Tracker::new("feasibility");
    for (t, x) in plays.enumerate() {
        tr.observe(t as u64 + 1, infeasibility(set, x), POINT_TOL);
    }
    tr.finish()
}

fn scalar_check(name: &'static str, observed: f64, allowed: f64) -> Check {
    let mut tr = Tracker::new(name);
    tr.observe(1, observed, allowed);
    tr.finish()
}

fn count_check(name: &'static str, observed: u64, expected: u64) -> Check {
    scalar_check(name, observed.abs_diff(expected) as f64, 0.0)
}

/// Full-information checks: feasibility, the per-round tolerance
/// `F_t(x_t) - min F_t <= eps_t`, the drift of consecutive exact minimizers,
/// one LMO call per round, and both regret bounds.
pub fn verify_ofw(
    losses: &LossSequence,
    set: &FeasibleSet,
    config: &OfwConfig,
    x1: &[f64],
    trace: &RunTrace,
    regret: f64,
) -> Result<VerifyReport> {
    let bounds = losses.bounds();
    let (g, r, a) = (bounds.gradient_bound, set.outer_radius(), config.alpha);
    let horizon = trace.len() as u64;

    let mut gap = Tracker::new("epsilon-gap");
    let mut drift = Tracker::new("minimizer-drift");
    let mut obj = RftlObjective::fresh(config.alpha, config.t0, x1)?;
    let mut prev_min: Option<Vector> = None;
    for (idx, (round, loss)) in trace.rounds.iter().zip(losses.losses()).enumerate() {
        let t = idx as u64 + 1;
        let x_star = obj.exact_minimizer(set)?;
        let sub = obj.difference(&round.play, &x_star);
        gap.observe(t, sub, config.epsilon(t) + GAP_SLACK);
        if let Some(p) = &prev_min {
            drift.observe(
                t - 1,
                distance(p, &x_star),
                ofw_full::minimizer_drift_bound(g, r, a, config.t0, t - 1) + POINT_TOL,
            );
        }
        prev_min = Some(x_star);
        obj.accumulate(&loss.gradient(&round.play)?, &round.play, 1.0)?;
    }
    if let Some(p) = &prev_min {
        let last = obj.exact_minimizer(set)?;
        drift.observe(
            horizon,
            distance(p, &last),
            ofw_full::minimizer_drift_bound(g, r, a, config.t0, horizon) + POINT_TOL,
        );
    }

    let mut lmo = Tracker::new("lmo-calls");
    for (idx, round) in trace.rounds.iter().enumerate() {
        lmo.observe(idx as u64 + 1, round.lmo_calls.abs_diff(idx as u64 + 1) as f64, 0.0);
    }
    lmo.observe(horizon, trace.lmo_calls.abs_diff(horizon) as f64, 0.0);

    let params = ScheduleParams {
        b: config.b,
        t0: config.t0,
    };
    Ok(VerifyReport {
        checks: vec![
            feasibility_check(set, trace.plays()),
            gap.finish(),
            drift.finish(),
            lmo.finish(),
            scalar_check(
                "regret-bound",
                regret,
                ofw_full::full_info_regret_bound(g, r, a, horizon),
            ),
            scalar_check(
                "regret-decomposition",
                regret,
                ofw_full::regret_decomposition_bound(g, r, a, params, horizon),
            ),
        ],
    })
}

/// Bandit checks: feasibility of the played points, the block play
/// structure `y_t = x_{m-1} + delta u_t` with unit `u_t`, recomputed block
/// gradients, base continuity between blocks, the per-block certificate
/// `F_m(x_m) - min F_m <= eps_m` on a rebuilt objective, the step bound of
/// every inner solve, and the LMO and regret bounds.
pub fn verify_bandit(
    losses: &LossSequence,
    set: &FeasibleSet,
    config: &BanditConfig,
    x0: &[f64],
    trace: &RunTrace,
    blocks: &[BlockRecord],
    regret: f64,
) -> Result<VerifyReport> {
    let bounds = losses.bounds();
    let (inner, outer) = (set.inner_radius(), set.outer_radius());
    let shrunk = set.shrink(config.delta)?;
    let n = set.dim() as f64;
    let rounds = &trace.rounds;

    let mut structure = Tracker::new("play-structure");
    let mut estimate = Tracker::new("block-gradient");
    let mut continuity = Tracker::new("base-continuity");
    let mut certificate = Tracker::new("block-certificate");
    let mut solver_gap = Tracker::new("solver-gap");
    let mut steps = Tracker::new("inner-step-bound");
    let mut expected_base = Vector::from(x0);
    let mut obj = RftlObjective::fresh(config.alpha, config.t0, x0)?;
    let mut lmo_total = 0u64;
    let mut covered = 0usize;

    for block in blocks {
        let m = block.m;
        continuity.observe(m, distance(&block.base, &expected_base), 0.0);

        let start = block.first_round as usize;
        let len = block.directions.len();
        let mut g_hat = Vector::zeros(set.dim());
        for (s, u) in block.directions.iter().enumerate() {
            let t = start + s;
            let (Some(round), Some(loss)) = (rounds.get(t), losses.losses().get(t)) else {
                structure.observe(t as u64 + 1, f64::INFINITY, 0.0);
                continue;
            };
            let mut y = block.base.clone();
            y.axpy(config.delta, u);
            let dev = distance(&y, &round.play).max((u.norm() - 1.0).abs());
            structure.observe(t as u64 + 1, dev, POINT_TOL);
            g_hat.axpy(n / config.delta * loss.value(&round.play)?, u);
        }
        covered += len;
        let scale = g_hat.norm().max(1.0);
        estimate.observe(m, distance(&g_hat, &block.block_gradient) / scale, POINT_TOL);

        if let Some(solve) = &block.solve {
            let eps = config.epsilon(m);
            let sub = obj.suboptimality(&shrunk, &solve.x_out)?;
            certificate.observe(m, sub, eps + GAP_SLACK);
            solver_gap.observe(m, solve.final_gap, eps);
            // After ceil(L) steps the iterate must already be eps-optimal; the
            // solver may keep stepping while its gap certificate is loose.
            let x_star = obj.exact_minimizer(&shrunk)?;
            let h1 = obj.difference(&block.base, &x_star);
            let cap = iteration_bound(obj.hessian_scale() / 2.0, shrunk.outer_radius(), h1, eps);
            let at_cap = (cap.ceil() as usize).min(solve.values.len().saturating_sub(1));
            let f_star = obj.value(&x_star);
            steps.observe(
                m,
                solve.values.get(at_cap).map_or(f64::INFINITY, |v| v - f_star),
                eps + GAP_SLACK,
            );
            lmo_total += solve.lmo_calls;
            expected_base = solve.x_out.clone();
        }
        obj.accumulate(&g_hat, &block.base, len as f64)?;
    }
    structure.observe(
        rounds.len() as u64,
        covered.abs_diff(rounds.len()) as f64 + (rounds.len().abs_diff(losses.len())) as f64,
        0.0,
    );

    let limits = ofw_bandit::bandit_bounds(config, &bounds, inner, outer);
    let mut lmo = Tracker::new("lmo-calls");
    lmo.observe(1, lmo_total.abs_diff(trace.lmo_calls) as f64, 0.0);
    lmo.observe(2, trace.lmo_calls as f64, limits.lmo_calls);

    Ok(VerifyReport {
        checks: vec![
            feasibility_check(set, trace.plays()),
            structure.finish(),
            estimate.finish(),
            continuity.finish(),
            certificate.finish(),
            solver_gap.finish(),
            steps.finish(),
            lmo.finish(),
            scalar_check("regret-bound", regret, limits.regret),
            scalar_check(
                "regret-decomposition",
                regret,
                ofw_bandit::regret_decomposition_bound(config, &bounds, inner, outer),
            ),
        ],
    })
}

/// Projected gradient descent: feasibility, one projection per round, no
/// LMO calls, and the logarithmic regret bound `(G^2 / (2 alpha))(1 + ln T)`.
pub fn verify_ogd(losses: &LossSequence, set: &FeasibleSet, trace: &RunTrace, regret: f64) -> Result<VerifyReport> {
    let horizon = trace.len() as u64;
    Ok(VerifyReport {
        checks: vec![
            feasibility_check(set, trace.plays()),
            count_check("projections", trace.projections, horizon),
            count_check("lmo-calls", trace.lmo_calls, 0),
            scalar_check("regret-bound", regret, ogd_regret_bound(losses, horizon)),
        ],
    })
}

/// Exact RFTL: every play is the exact minimizer of the objective rebuilt
/// from the previous plays.
pub fn verify_rftl(
    losses: &LossSequence,
    set: &FeasibleSet,
    alpha: f64,
    t0: f64,
    x1: &[f64],
    trace: &RunTrace,
    regret: f64,
) -> Result<VerifyReport> {
    let horizon = trace.len() as u64;
    let mut exact = Tracker::new("exact-minimizer");
    let mut obj = RftlObjective::fresh(alpha, t0, x1)?;
    for (idx, (round, loss)) in trace.rounds.iter().zip(losses.losses()).enumerate() {
        let x_star = obj.exact_minimizer(set)?;
        exact.observe(idx as u64 + 1, distance(&round.play, &x_star), POINT_TOL);
        obj.accumulate(&loss.gradient(&round.play)?, &round.play, 1.0)?;
    }
    Ok(VerifyReport {
        checks: vec![
            feasibility_check(set, trace.plays()),
            exact.finish(),
            count_check("projections", trace.projections, horizon),
            scalar_check("regret-bound", regret, rftl_regret_bound(losses, set, t0, horizon)),
        ],
    })
}

/// `(G^2 / (2 alpha)) (1 + ln T)` for step sizes `1/(alpha t)`.
pub fn ogd_regret_bound(losses: &LossSequence, horizon: u64) -> f64 {
    let b = losses.bounds();
    b.gradient_bound * b.gradient_bound / (2.0 * b.alpha) * (1.0 + (horizon as f64).ln())
}

/// `2 (G + 2R alpha)^2 / alpha (1 + ln T) + 2 alpha R^2 T0` for exact RFTL.
pub fn rftl_regret_bound(losses: &LossSequence, set: &FeasibleSet, t0: f64, horizon: u64) -> f64 {
    let b = losses.bounds();
    let r = set.outer_radius();
    let lip = b.gradient_bound + 2.0 * r * b.alpha;
    2.0 * lip * lip / b.alpha * (1.0 + (horizon as f64).ln()) + 2.0 * b.alpha * r * r * t0
}
