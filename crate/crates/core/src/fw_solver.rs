//! Frank-Wolfe with a duality-gap stopping rule and exact line search.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{dot, FeasibleSet, Vector};
use crate::objective::RftlObjective;

const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub x_out: Vector,
    /// Gap evaluations, one LMO call each.
    pub iterations: u64,
    /// Frank-Wolfe steps taken, i.e. gap evaluations that exceeded epsilon.
    pub steps: u64,
    pub final_gap: f64,
    pub lmo_calls: u64,
    pub converged: bool,
    /// Duality gap at each evaluated iterate.
    pub gaps: Vec<f64>,
    /// Objective value at each evaluated iterate.
    pub values: Vec<f64>,
}

/// Runs Frank-Wolfe from `x_init` and stops at the first iterate whose gap
/// `<grad F(z), z - v>` is at most `epsilon`, returning that iterate.
///
/// If `max_iter` gap evaluations all exceed `epsilon`, the report is flagged
/// `converged = false` and carries the last iterate; its suboptimality is
/// still bounded by `final_gap` because every step decreases `F`.
pub fn solve_with_gap(
    obj: &RftlObjective,
    set: &FeasibleSet,
    epsilon: f64,
    x_init: &[f64],
    max_iter: u64,
) -> Result<SolveReport> {
    check_dim(set.dim(), obj.dim())?;
    check_dim(set.dim(), x_init.len())?;
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::Parameter(format!("epsilon must be positive, got {epsilon}")));
    }
    if max_iter == 0 {
        return Err(Error::Parameter("max_iter must be at least 1".into()));
    }
    if !set.contains(x_init, FEASIBILITY_TOL) {
        return Err(Error::Usage("initial point is not in the feasible set".into()));
    }

    let mut z = Vector::from(x_init);
    let mut gaps = Vec::new();
    let mut values = Vec::new();
    for _ in 0..max_iter {
        let grad = obj.gradient(&z);
        let v = set.lmo(&grad)?;
        let gap = dot(&grad, &z) - dot(&grad, &v);
        gaps.push(gap);
        values.push(obj.value(&z));
        if gap <= epsilon {
            return Ok(report(z, gaps, values, true));
        }
        let (_, next) = obj.line_search_step(&z, &v);
        z = next;
    }
    Ok(report(z, gaps, values, false))
}

fn report(x_out: Vector, gaps: Vec<f64>, values: Vec<f64>, converged: bool) -> SolveReport {
    let iterations = gaps.len() as u64;
    SolveReport {
        x_out,
        iterations,
        steps: if converged { iterations - 1 } else { iterations },
        final_gap: *gaps.last().expect("at least one gap evaluation"),
        lmo_calls: iterations,
        converged,
        gaps,
        values,
    }
}

/// Number of Frank-Wolfe steps after which a `2 beta`-smooth objective with
/// initial suboptimality `h1` is within `epsilon` of its minimum over a set
/// of diameter at most `2R`:
/// `max{4 beta (2R)^2 (h1 - eps) / eps^2, 2 (h1 - eps) / eps}`, or 0 when
/// `h1 <= eps`.
pub fn iteration_bound(beta: f64, radius: f64, h1: f64, epsilon: f64) -> f64 {
    if h1 <= epsilon {
        return 0.0;
    }
    let excess = h1 - epsilon;
    let diameter_sq = 4.0 * radius * radius;
    f64::max(
        4.0 * beta * diameter_sq * excess / (epsilon * epsilon),
        2.0 * excess / epsilon,
    )
}

/// Iteration budget for [`solve_with_gap`]: ten times the step bound, with
/// the initial suboptimality replaced by the certified upper bound
/// `2R ||grad F(x_init)||` (the gap over a set of diameter `2R`).
pub fn default_max_iter(obj: &RftlObjective, set: &FeasibleSet, epsilon: f64, x_init: &[f64]) -> u64 {
    let radius = set.outer_radius();
    let h1_bound = 2.0 * radius * obj.gradient(x_init).norm();
    let cap = iteration_bound(obj.hessian_scale() / 2.0, radius, h1_bound, epsilon);
    let budget = 10.0 * (cap.ceil() + 1.0);
    if budget.is_finite() && budget < u64::MAX as f64 {
        budget as u64
    } else {
        u64::MAX
    }
}
