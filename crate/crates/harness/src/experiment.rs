//! Cell execution and sweep orchestration.
//!
//! A cell is one `(T, seed)` pair. Its randomness comes from
//! `Rng::with_stream(seed, T)`, so a cell reproduces in isolation and the
//! results do not depend on which thread ran it or in what order.

use std::time::Instant;

use pfol_core::baselines::{ogd_run, rftl_exact_run};
use pfol_core::losses::generate_sequence;
use pfol_core::ofw_bandit::{self, BanditConfig, BlockRecord};
use pfol_core::ofw_full::{self, schedule_params, OfwConfig};
use pfol_core::{FeasibleSet, LossSequence, Rng, RunTrace};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Algo, ExperimentSpec};
use crate::error::{HarnessError, Result};
use crate::output::Row;
use crate::regret::compute_regret;
use crate::verify::{self, VerifyReport};

/// The algorithm parameters resolved for one cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algo", rename_all = "kebab-case")]
pub enum CellParams {
    Ofw(OfwConfig),
    OfwBandit(BanditConfig),
    Ogd { alpha: f64 },
    Rftl { alpha: f64, t0: f64 },
}

/// Everything a cell needs before running: its set, losses and parameters.
#[derive(Clone, Debug)]
pub struct PreparedCell {
    pub horizon: u64,
    pub seed: u64,
    pub set: FeasibleSet,
    pub losses: LossSequence,
    pub params: CellParams,
    pub start: Vec<f64>,
    pub rng: Rng,
}

/// Regret and LMO-call bounds reported next to each measurement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellBounds {
    pub regret: f64,
    pub lmo_calls: f64,
}

#[derive(Clone, Debug)]
pub struct CellArtifacts {
    pub row: Row,
    pub params: CellParams,
    pub trace: RunTrace,
    pub blocks: Vec<BlockRecord>,
    pub report: Option<VerifyReport>,
}

pub fn cell_rng(seed: u64, horizon: u64) -> Rng {
    Rng::with_stream(seed, horizon)
}

/// Resolves the parameters of one cell, applying the experiment's overrides on top
/// of the automatic schedule of the chosen algorithm.
pub fn prepare_cell(spec: &ExperimentSpec, horizon: u64, seed: u64) -> Result<PreparedCell> {
    let set = spec.feasible_set()?;
    let rng = cell_rng(seed, horizon);
    let losses = generate_sequence(&spec.adversary, horizon as usize, &set, &rng)?;
    let ov = &spec.overrides;
    let alpha = losses.alpha();
    let params = match spec.algo {
        Algo::Ofw => {
            let auto = OfwConfig::auto(&losses, &set, ov.b_constant);
            let cfg = match ov.t0 {
                Some(t0) => OfwConfig::manual(alpha, t0, auto.b)?,
                None => auto,
            };
            CellParams::Ofw(cfg.with_suboptimality(spec.verify))
        }
        Algo::OfwBandit => CellParams::OfwBandit(bandit_config(spec, &losses, &set, horizon)?),
        Algo::Ogd => CellParams::Ogd { alpha },
        Algo::Rftl => {
            let t0 = match ov.t0 {
                Some(t0) => t0,
                None => {
                    let b = losses.bounds();
                    schedule_params(b.gradient_bound, set.outer_radius(), alpha, ov.b_constant).t0
                }
            };
            if !(t0.is_finite() && t0 > 0.0) {
                return Err(HarnessError::Config(format!("T0 must be positive, got {t0}")));
            }
            CellParams::Rftl { alpha, t0 }
        }
    };
    let start = spec.start_point();
    let start_set = match &params {
        CellParams::OfwBandit(cfg) => set.shrink(cfg.delta)?,
        _ => set.clone(),
    };
    if !start_set.contains(&start, 1e-9) {
        return Err(HarnessError::Config(
            "starting point is outside the feasible set (the shrunken set for bandit runs)".into(),
        ));
    }
    Ok(PreparedCell {
        horizon,
        seed,
        set,
        losses,
        params,
        start,
        rng,
    })
}

fn bandit_config(
    spec: &ExperimentSpec,
    losses: &LossSequence,
    set: &FeasibleSet,
    horizon: u64,
) -> Result<BanditConfig> {
    let ov = &spec.overrides;
    let t13 = (horizon as f64).cbrt();
    let c = match (ov.c, ov.delta) {
        (Some(c), _) => Some(c),
        (None, Some(d)) => Some(d * t13),
        (None, None) => None,
    };
    let check_c = |c: f64| -> Result<()> {
        let r = set.inner_radius();
        if !(c.is_finite() && c > 0.0) {
            return Err(HarnessError::Config(format!("c must be positive, got {c}")));
        }
        if c / t13 > r {
            return Err(HarnessError::Config(format!(
                "delta = c T^(-1/3) = {} exceeds the inner radius r = {r}; need c T^(-1/3) / r <= 1",
                c / t13
            )));
        }
        Ok(())
    };
    if let Some(c) = c {
        check_c(c)?;
    }
    let mut cfg = BanditConfig::auto(losses, set, c)?;
    if let Some(k) = ov.block {
        if k == 0 {
            return Err(HarnessError::Config("block length K must be at least 1".into()));
        }
        cfg.block = k;
        cfg.t0 = f64::max(4.0 * k as f64, 8.0 / cfg.alpha);
    }
    if let Some(t0) = ov.t0 {
        if !(t0.is_finite() && t0 >= 0.0) {
            return Err(HarnessError::Config(format!("T0 must be nonnegative, got {t0}")));
        }
        cfg.t0 = t0;
    }
    if let Some(rule) = ov.epsilon_rule {
        cfg.epsilon_rule = rule;
    }
    Ok(cfg.with_solve_mode(ov.solve_mode).with_suboptimality(spec.verify))
}

/// The bounds reported in the `bound_regret` and `bound_lmo` columns.
pub fn cell_bounds(cell: &PreparedCell) -> CellBounds {
    let b = cell.losses.bounds();
    let r = cell.set.outer_radius();
    let t = cell.horizon;
    match &cell.params {
        CellParams::Ofw(cfg) => CellBounds {
            regret: ofw_full::full_info_regret_bound(b.gradient_bound, r, cfg.alpha, t),
            lmo_calls: t as f64,
        },
        CellParams::OfwBandit(cfg) => {
            let tb = ofw_bandit::bandit_bounds(cfg, &b, cell.set.inner_radius(), r);
            CellBounds {
                regret: tb.regret,
                lmo_calls: tb.lmo_calls,
            }
        }
        CellParams::Ogd { .. } => CellBounds {
            regret: verify::ogd_regret_bound(&cell.losses, t),
            lmo_calls: 0.0,
        },
        CellParams::Rftl { t0, .. } => CellBounds {
            regret: verify::rftl_regret_bound(&cell.losses, &cell.set, *t0, t),
            lmo_calls: 0.0,
        },
    }
}

/// Runs a prepared cell; verification runs when `verify` is set.
pub fn execute_cell(spec: &ExperimentSpec, cell: &PreparedCell) -> Result<CellArtifacts> {
    let clock = Instant::now();
    let (trace, blocks) = match &cell.params {
        CellParams::Ofw(cfg) => (ofw_full::run(&cell.losses, &cell.set, cfg, &cell.start)?, Vec::new()),
        CellParams::OfwBandit(cfg) => {
            let run = ofw_bandit::run(&cell.losses, &cell.set, cfg, &cell.rng, &cell.start)?;
            (run.trace, run.blocks)
        }
        CellParams::Ogd { alpha } => (ogd_run(&cell.losses, &cell.set, *alpha, &cell.start)?, Vec::new()),
        CellParams::Rftl { alpha, t0 } => (
            rftl_exact_run(&cell.losses, &cell.set, *alpha, *t0, &cell.start)?,
            Vec::new(),
        ),
    };
    let elapsed = clock.elapsed();
    let regret = compute_regret(&trace, &cell.losses, &cell.set)?;
    let report = if spec.verify {
        Some(match &cell.params {
            CellParams::Ofw(cfg) => verify::verify_ofw(&cell.losses, &cell.set, cfg, &cell.start, &trace, regret)?,
            CellParams::OfwBandit(cfg) => {
                verify::verify_bandit(&cell.losses, &cell.set, cfg, &cell.start, &trace, &blocks, regret)?
            }
            CellParams::Ogd { .. } => verify::verify_ogd(&cell.losses, &cell.set, &trace, regret)?,
            CellParams::Rftl { alpha, t0 } => {
                verify::verify_rftl(&cell.losses, &cell.set, *alpha, *t0, &cell.start, &trace, regret)?
            }
        })
    } else {
        None
    };
    finish(spec, cell, trace, blocks, regret, report, elapsed.as_millis())
}

fn finish(
    spec: &ExperimentSpec,
    cell: &PreparedCell,
    trace: RunTrace,
    blocks: Vec<BlockRecord>,
    regret: f64,
    report: Option<VerifyReport>,
    elapsed_ms: u128,
) -> Result<CellArtifacts> {
    let bounds = cell_bounds(cell);
    let row = Row {
        algo: spec.algo.label().to_string(),
        set: cell.set.label().to_string(),
        dim: spec.dim,
        horizon: cell.horizon,
        seed: cell.seed,
        regret,
        regret_norm: regret / (cell.horizon as f64).powf(2.0 / 3.0),
        lmo_calls: trace.lmo_calls,
        projections: trace.projections,
        bound_regret: bounds.regret,
        bound_lmo: bounds.lmo_calls,
        wall_ms: if spec.timing { elapsed_ms as u64 } else { 0 },
    };
    Ok(CellArtifacts {
        row,
        params: cell.params.clone(),
        trace,
        blocks,
        report,
    })
}

/// Prepares and runs one cell.
pub fn run_cell(spec: &ExperimentSpec, horizon: u64, seed: u64) -> Result<CellArtifacts> {
    let cell = prepare_cell(spec, horizon, seed)?;
    execute_cell(spec, &cell)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads; 1 runs serially, 0 uses rayon's default.
    pub threads: usize,
    /// Keep traces and block records of every cell in the result.
    pub keep_traces: bool,
}

#[derive(Clone, Debug)]
pub struct CellOutcome {
    pub horizon: u64,
    pub seed: u64,
    pub result: std::result::Result<CellArtifacts, String>,
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    /// One outcome per cell in spec order (horizons outer, seeds inner).
    pub cells: Vec<CellOutcome>,
}

impl ExperimentResult {
    /// Rows of the cells that completed, in spec order.
    pub fn rows(&self) -> Vec<Row> {
        self.cells
            .iter()
            .filter_map(|c| c.result.as_ref().ok().map(|a| a.row.clone()))
            .collect()
    }

    pub fn failures(&self) -> impl Iterator<Item = (&CellOutcome, &str)> {
        self.cells
            .iter()
            .filter_map(|c| c.result.as_ref().err().map(|e| (c, e.as_str())))
    }

    pub fn reports(&self) -> impl Iterator<Item = (&CellOutcome, &VerifyReport)> {
        self.cells
            .iter()
            .filter_map(|c| c.result.as_ref().ok().and_then(|a| a.report.as_ref()).map(|r| (c, r)))
    }

    pub fn all_verified(&self) -> bool {
        self.failures().next().is_none() && self.reports().all(|(_, r)| r.passed())
    }
}

/// Runs every cell of `spec`. Configuration problems in any cell (for
/// instance a perturbation radius exceeding the inner radius) are reported
/// before anything runs; failures while running are recorded per cell and
/// the remaining cells proceed.
pub fn run_experiment(spec: &ExperimentSpec, options: RunOptions) -> Result<ExperimentResult> {
    spec.validate()?;
    let cells = spec.cells();
    for &(t, s) in &cells {
        prepare_cell(spec, t, s).map_err(|e| match e {
            HarnessError::Config(msg) => HarnessError::Config(format!("cell T={t}, seed={s}: {msg}")),
            HarnessError::Core(inner) => HarnessError::Config(format!("cell T={t}, seed={s}: {inner}")),
            other => other,
        })?;
    }
    let one = |&(horizon, seed): &(u64, u64)| -> CellOutcome {
        let result = run_cell(spec, horizon, seed)
            .map(|mut a| {
                if !options.keep_traces {
                    a.trace = RunTrace::default();
                    a.blocks = Vec::new();
                }
                a
            })
            .map_err(|e| {
                log::error!("cell T={horizon}, seed={seed} failed: {e}");
                e.to_string()
            });
        CellOutcome { horizon, seed, result }
    };
    let outcomes = if options.threads == 1 {
        cells.iter().map(one).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.threads)
            .build()
            .map_err(|e| HarnessError::Config(format!("cannot build thread pool: {e}")))?;
        pool.install(|| cells.par_iter().map(one).collect())
    };
    Ok(ExperimentResult { cells: outcomes })
}
