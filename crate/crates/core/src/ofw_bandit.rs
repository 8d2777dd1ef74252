//! Block-structured bandit Online Frank-Wolfe.
//!
//! Rounds are grouped into blocks of `K`. During block `m` the learner plays
//! `y_t = x_{m-1} + delta u_t` with `u_t` uniform on the sphere, observes only
//! the scalar `f_t(y_t)`, and sums the one-point estimates
//! `(n/delta) f_t(y_t) u_t` into a block gradient. Meanwhile a gap-certified
//! Frank-Wolfe solve on the shrunken set computes `x_m` from the objective of
//! the previous blocks, so the next block is played from a point whose
//! `delta`-ball stays feasible.

use std::thread;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::fw_solver::{default_max_iter, solve_with_gap, SolveReport};
use crate::geometry::{derive_stream, sample_sphere, streams, FeasibleSet, Rng, Vector};
use crate::losses::{LossBounds, LossSequence, ValueOracle};
use crate::objective::RftlObjective;
use crate::ofw_full::check_alpha;
use crate::trace::{RoundRecord, RunTrace};

const FEASIBILITY_TOL: f64 = 1e-9;

/// The inner tolerance for block `m`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EpsilonRule {
    /// `16 R^2 (alpha (m K + T0))^{1/3}`.
    #[default]
    Standard,
    /// `16 R^2 (alpha (m K + T0) / 2)^{1/3}`, using the half-smoothness.
    HalfSmoothness,
    Constant {
        value: f64,
    },
}

/// How the inner solve of a block is scheduled relative to its plays. All
/// modes produce identical traces: the solve reads only the frozen objective
/// and `x_{m-1}`, the plays read only `x_{m-1}` and the learner's stream.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMode {
    #[default]
    SolveFirst,
    PlayFirst,
    Background,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BanditConfig {
    pub dim: usize,
    pub horizon: u64,
    /// Block length `K`.
    pub block: u64,
    pub delta: f64,
    /// The constant with `delta = c T^{-1/3}`.
    pub c: f64,
    pub t0: f64,
    pub alpha: f64,
    /// Outer radius of the original set, used by the tolerance schedule.
    pub radius: f64,
    #[serde(default)]
    pub epsilon_rule: EpsilonRule,
    #[serde(default)]
    pub solve_mode: SolveMode,
    /// Record per-block suboptimality on the shrunken set (one projection
    /// per block).
    #[serde(default)]
    pub record_suboptimality: bool,
}

/// Smallest `k` with `k^3 >= T^2`, i.e. `ceil(T^{2/3})` without rounding error.
pub fn block_length(horizon: u64) -> u64 {
    let target = (horizon as u128) * (horizon as u128);
    let mut k = (horizon as f64).powf(2.0 / 3.0).round().max(1.0) as u128;
    while k > 1 && (k - 1).pow(3) >= target {
        k -= 1;
    }
    while k.pow(3) < target {
        k += 1;
    }
    k as u64
}

/// The constant `c = (r (nM)^2 ln T / (G R alpha))^{1/3}`, admissible exactly
/// when `(nM)^2 ln T / (r^2 G R alpha) <= T`.
pub fn auto_c(dim: usize, m: f64, g: f64, outer: f64, inner: f64, alpha: f64, horizon: u64) -> Result<f64> {
    let nm = dim as f64 * m;
    let ln_t = (horizon as f64).ln();
    let condition = nm * nm * ln_t / (inner * inner * g * outer * alpha);
    if condition > horizon as f64 {
        return Err(Error::Parameter(format!(
            "automatic c needs (nM)^2 ln T / (r^2 G R alpha) <= T, got {condition} > {horizon}"
        )));
    }
    Ok((inner * nm * nm * ln_t / (g * outer * alpha)).cbrt())
}

/// Parameters `delta = c T^{-1/3}`, `K = ceil(T^{2/3})`,
/// `T0 = max{4K, 8/alpha}`, with `c` chosen by [`auto_c`] when absent.
#[allow(clippy::too_many_arguments)]
pub fn bandit_params(
    dim: usize,
    m: f64,
    g: f64,
    outer: f64,
    inner: f64,
    alpha: f64,
    horizon: u64,
    c: Option<f64>,
) -> Result<BanditConfig> {
    if dim == 0 || horizon == 0 {
        return Err(Error::Parameter("dimension and horizon must be at least 1".into()));
    }
    for (name, v) in [("M", m), ("G", g), ("R", outer), ("r", inner), ("alpha", alpha)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Parameter(format!("{name} must be positive, got {v}")));
        }
    }
    let c = match c {
        Some(c) => c,
        None => auto_c(dim, m, g, outer, inner, alpha, horizon)?,
    };
    let block = block_length(horizon);
    let cfg = BanditConfig {
        dim,
        horizon,
        block,
        delta: c / (horizon as f64).cbrt(),
        c,
        t0: f64::max(4.0 * block as f64, 8.0 / alpha),
        alpha,
        radius: outer,
        epsilon_rule: EpsilonRule::Standard,
        solve_mode: SolveMode::SolveFirst,
        record_suboptimality: false,
    };
    cfg.validate(inner)?;
    Ok(cfg)
}

impl BanditConfig {
    /// Parameters for a sequence on `set`, from its certified bounds.
    pub fn auto(losses: &LossSequence, set: &FeasibleSet, c: Option<f64>) -> Result<Self> {
        let b = losses.bounds();
        bandit_params(
            set.dim(),
            b.value_bound,
            b.gradient_bound,
            set.outer_radius(),
            set.inner_radius(),
            b.alpha,
            losses.len() as u64,
            c,
        )
    }

    pub fn num_blocks(&self) -> u64 {
        self.horizon.div_ceil(self.block)
    }

    /// Tolerance `eps_m` for block `m >= 1`.
    pub fn epsilon(&self, m: u64) -> f64 {
        let beta = self.alpha * (m as f64 * self.block as f64 + self.t0);
        let r2 = self.radius * self.radius;
        match self.epsilon_rule {
            EpsilonRule::Standard => 16.0 * r2 * beta.cbrt(),
            EpsilonRule::HalfSmoothness => 16.0 * r2 * (beta / 2.0).cbrt(),
            EpsilonRule::Constant { value } => value,
        }
    }

    pub fn with_solve_mode(mut self, mode: SolveMode) -> Self {
        self.solve_mode = mode;
        self
    }

    pub fn with_suboptimality(mut self, record: bool) -> Self {
        self.record_suboptimality = record;
        self
    }

    fn validate(&self, inner: f64) -> Result<()> {
        if self.block == 0 || self.horizon == 0 {
            return Err(Error::Parameter("horizon and block length must be at least 1".into()));
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::Parameter(format!("delta must be positive, got {}", self.delta)));
        }
        if self.delta > inner {
            return Err(Error::Parameter(format!(
                "delta = c T^(-1/3) = {} exceeds the inner radius r = {inner}; need c T^(-1/3) / r <= 1",
                self.delta
            )));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::Parameter(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.t0.is_finite() && self.t0 >= 0.0) {
            return Err(Error::Parameter(format!("T0 must be nonnegative, got {}", self.t0)));
        }
        if let EpsilonRule::Constant { value } = self.epsilon_rule {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Parameter(format!("epsilon must be positive, got {value}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockRecord {
    /// Block index, starting at 1.
    pub m: u64,
    /// 0-based index of the block's first round.
    pub first_round: u64,
    /// `x_{m-1}`, the base point of every play in the block.
    pub base: Vector,
    /// Sphere directions `u_t`, one per round of the block.
    pub directions: Vec<Vector>,
    /// Sum of the block's one-point estimates.
    pub block_gradient: Vector,
    /// Tolerance handed to the inner solve (`eps_m`).
    pub epsilon: f64,
    /// Inner solve producing `x_m`; absent for the first block.
    pub solve: Option<SolveReport>,
    /// Hessian scale of the solved objective, `alpha ((m-1) K + T0)`.
    pub hessian_scale: f64,
    /// `F_m(x_{m-1}) - min F_m` over the shrunken set, verification only.
    pub initial_suboptimality: Option<f64>,
    /// `F_m(x_m) - min F_m` over the shrunken set, verification only.
    pub suboptimality: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BanditRun {
    pub trace: RunTrace,
    pub blocks: Vec<BlockRecord>,
}

struct PlayedBlock {
    directions: Vec<Vector>,
    rounds: Vec<RoundRecord>,
    block_gradient: Vector,
}

/// Plays one block from `base`: the learner touches only scalar values at
/// the played points.
fn play_block<O: ValueOracle>(
    losses: &[O],
    set: &FeasibleSet,
    base: &[f64],
    delta: f64,
    rng: &mut Rng,
    first_round: u64,
) -> Result<PlayedBlock> {
    let n = base.len();
    let mut directions = Vec::with_capacity(losses.len());
    let mut rounds = Vec::with_capacity(losses.len());
    let mut block_gradient = Vector::zeros(n);
    for (s, loss) in losses.iter().enumerate() {
        let u = sample_sphere(rng, n);
        let mut y = Vector::from(base);
        y.axpy(delta, &u);
        if !set.contains(&y, FEASIBILITY_TOL) {
            return Err(Error::InvariantViolation(format!(
                "play at round {} left the feasible set",
                first_round + s as u64 + 1
            )));
        }
        let value = loss.value(&y)?;
        let scale = n as f64 / delta * value;
        block_gradient.axpy(scale, &u);
        rounds.push(RoundRecord {
            play: y,
            loss: value,
            grad_norm: scale.abs(),
            sigma: 0.0,
            lmo_calls: 0,
            suboptimality: None,
        });
        directions.push(u);
    }
    Ok(PlayedBlock {
        directions,
        rounds,
        block_gradient,
    })
}

/// Sum of `K = directions` one-point estimates of `oracle` around `base`,
/// drawing the directions from `rng`.
pub fn simulate_block_gradient<O: ValueOracle + ?Sized>(
    oracle: &O,
    base: &[f64],
    delta: f64,
    block: usize,
    rng: &mut Rng,
) -> Result<Vector> {
    check_dim(oracle.dim(), base.len())?;
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Parameter(format!("delta must be positive, got {delta}")));
    }
    let n = base.len();
    let mut sum = Vector::zeros(n);
    for _ in 0..block {
        let u = sample_sphere(rng, n);
        let mut y = Vector::from(base);
        y.axpy(delta, &u);
        sum.axpy(n as f64 / delta * oracle.value(&y)?, &u);
    }
    Ok(sum)
}

fn solve_block(obj: &RftlObjective, shrunk: &FeasibleSet, epsilon: f64, base: &[f64], m: u64) -> Result<SolveReport> {
    let budget = default_max_iter(obj, shrunk, epsilon, base);
    let report = solve_with_gap(obj, shrunk, epsilon, base, budget)?;
    if !report.converged {
        return Err(Error::InvariantViolation(format!(
            "inner solve of block {m} did not reach gap {epsilon} within {budget} iterations (last gap {})",
            report.final_gap
        )));
    }
    Ok(report)
}

/// Runs the bandit algorithm from `x0` (which must lie in the shrunken set).
/// The directions come from the learner sub-stream of `rng`.
pub fn run(
    losses: &LossSequence,
    set: &FeasibleSet,
    config: &BanditConfig,
    rng: &Rng,
    x0: &[f64],
) -> Result<BanditRun> {
    check_alpha(config.alpha, losses)?;
    run_with_oracles(losses.losses(), set, config, rng, x0)
}

/// [`run`] over arbitrary value oracles; the learner never sees more than
/// the scalar value at each played point.
pub fn run_with_oracles<O: ValueOracle + Sync>(
    losses: &[O],
    set: &FeasibleSet,
    config: &BanditConfig,
    rng: &Rng,
    x0: &[f64],
) -> Result<BanditRun> {
    config.validate(set.inner_radius())?;
    check_dim(set.dim(), config.dim)?;
    check_dim(set.dim(), x0.len())?;
    if losses.len() as u64 != config.horizon {
        return Err(Error::Usage(format!(
            "configured horizon {} does not match {} losses",
            config.horizon,
            losses.len()
        )));
    }
    let shrunk = set.shrink(config.delta)?;
    if !shrunk.contains(x0, FEASIBILITY_TOL) {
        return Err(Error::Usage("x0 is not in the shrunken set".into()));
    }

    let mut learner = rng.substream(derive_stream(streams::LEARNER, 0));
    let block = config.block as usize;
    let mut obj = RftlObjective::fresh(config.alpha, config.t0, x0)?;
    let mut base = Vector::from(x0);
    let mut rounds = Vec::with_capacity(losses.len());
    let mut blocks = Vec::with_capacity(config.num_blocks() as usize);
    let mut lmo_calls = 0u64;

    for (idx, chunk) in losses.chunks(block).enumerate() {
        let m = idx as u64 + 1;
        let first_round = idx as u64 * config.block;
        let epsilon = config.epsilon(m);
        let needs_solve = m > 1;

        let (played, solve) = if !needs_solve {
            (
                play_block(chunk, set, &base, config.delta, &mut learner, first_round)?,
                None,
            )
        } else {
            match config.solve_mode {
                SolveMode::SolveFirst => {
                    let s = solve_block(&obj, &shrunk, epsilon, &base, m)?;
                    let p = play_block(chunk, set, &base, config.delta, &mut learner, first_round)?;
                    (p, Some(s))
                }
                SolveMode::PlayFirst => {
                    let p = play_block(chunk, set, &base, config.delta, &mut learner, first_round)?;
                    let s = solve_block(&obj, &shrunk, epsilon, &base, m)?;
                    (p, Some(s))
                }
                SolveMode::Background => {
                    let snapshot = obj.clone();
                    let solve_base = base.clone();
                    let shrunk_ref = &shrunk;
                    let (p, s) = thread::scope(|scope| {
                        let handle = scope.spawn(move || solve_block(&snapshot, shrunk_ref, epsilon, &solve_base, m));
                        let p = play_block(chunk, set, &base, config.delta, &mut learner, first_round);
                        let s = handle.join().expect("inner solve thread panicked");
                        (p, s)
                    });
                    (p?, Some(s?))
                }
            }
        };

        let (initial_suboptimality, suboptimality) = match (&solve, config.record_suboptimality) {
            (Some(s), true) => (
                Some(obj.suboptimality(&shrunk, &base)?),
                Some(obj.suboptimality(&shrunk, &s.x_out)?),
            ),
            _ => (None, None),
        };
        lmo_calls += solve.as_ref().map_or(0, |s| s.lmo_calls);
        let PlayedBlock {
            directions,
            rounds: mut block_rounds,
            block_gradient,
        } = played;
        for r in &mut block_rounds {
            r.lmo_calls = lmo_calls;
        }
        rounds.extend(block_rounds);

        let hessian_scale = obj.hessian_scale();
        obj.accumulate(&block_gradient, &base, config.block as f64)?;
        let next = solve.as_ref().map(|s| s.x_out.clone());
        blocks.push(BlockRecord {
            m,
            first_round,
            base: base.clone(),
            directions,
            block_gradient,
            epsilon,
            solve,
            hessian_scale,
            initial_suboptimality,
            suboptimality,
        });
        if let Some(x) = next {
            base = x;
        }
    }

    Ok(BanditRun {
        trace: RunTrace {
            rounds,
            lmo_calls,
            projections: 0,
        },
        blocks,
    })
}

/// `E ||g_m||^2 <= K (nM/delta)^2 + K^2 G^2`.
pub fn block_gradient_norm_bound(dim: usize, m: f64, delta: f64, block: u64, g: f64) -> f64 {
    let k = block as f64;
    let nm = dim as f64 * m / delta;
    k * nm * nm + k * k * g * g
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BanditBounds {
    pub regret: f64,
    pub lmo_calls: f64,
}

/// Expected-regret and expected-LMO-call bounds for the constant `c` of
/// `config`, with `outer`/`inner` the radii of the original set.
pub fn bandit_bounds(config: &BanditConfig, bounds: &LossBounds, inner: f64, outer: f64) -> BanditBounds {
    let (n, m, g, a, c) = (
        config.dim as f64,
        bounds.value_bound,
        bounds.gradient_bound,
        config.alpha,
        config.c,
    );
    let t = config.horizon as f64;
    let t23 = t.powf(2.0 / 3.0);
    let sa = a.sqrt();
    let lead = 4.0 * c * outer * g / inner + 2.0 * outer * outer * a + 4.0 * g / a.cbrt();
    let quad = 2.0 * n * m / (c * sa) + 2.0 * g / sa + 4.0 * outer * sa;
    let regret = lead * t23 + quad * quad * t23 * (1.0 + t.ln());
    let inner_term = n * m / (2.0 * c * outer) + g / (2.0 * outer) + a;
    let lmo_calls = inner_term * t + inner_term * inner_term * t / a.powf(2.0 / 3.0);
    BanditBounds { regret, lmo_calls }
}

/// Regret bound in terms of the block tolerances:
/// `4/alpha (nM/delta + sqrt(K)(G + 2R alpha))^2 (1 + ln T) + 2 alpha R^2 T0
///  + 3 delta G T + delta (R/r) G T
///  + sqrt(2/alpha) G K sum_m sqrt(eps_m / ((m-1) K + T0))`.
pub fn regret_decomposition_bound(config: &BanditConfig, bounds: &LossBounds, inner: f64, outer: f64) -> f64 {
    let (n, m, g, a) = (
        config.dim as f64,
        bounds.value_bound,
        bounds.gradient_bound,
        config.alpha,
    );
    let (k, t, d) = (config.block as f64, config.horizon as f64, config.delta);
    let head = n * m / d + k.sqrt() * (g + 2.0 * outer * a);
    let eps_sum: f64 = (1..=config.num_blocks())
        .map(|b| (config.epsilon(b) / ((b as f64 - 1.0) * k + config.t0)).sqrt())
        .sum();
    4.0 / a * head * head * (1.0 + t.ln())
        + 2.0 * a * outer * outer * config.t0
        + 3.0 * d * g * t
        + d * outer / inner * g * t
        + (2.0 / a).sqrt() * g * k * eps_sum
}
