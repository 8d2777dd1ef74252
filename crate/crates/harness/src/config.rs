//! Declarative experiment description, loadable from TOML.
//!
//! ```toml
//! algo = "ofw"
//! set = "ball"
//! dim = 20
//! T = [1024, 2048, 4096, 8192]
//! seeds = [1, 2, 3]
//! verify = true
//!
//! [adversary]
//! kind = "drifting-center"
//! step = 0.05
//! alpha = 1.0
//!
//! [overrides]
//! T0 = 50.0
//! ```

use std::path::{Path, PathBuf};

use pfol_core::losses::AdversarySpec;
use pfol_core::ofw_bandit::{EpsilonRule, SolveMode};
use pfol_core::ofw_full::BConstant;
use pfol_core::FeasibleSet;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    Ofw,
    OfwBandit,
    Ogd,
    Rftl,
}

impl Algo {
    pub fn label(self) -> &'static str {
        match self {
            Algo::Ofw => "ofw",
            Algo::OfwBandit => "ofw-bandit",
            Algo::Ogd => "ogd",
            Algo::Rftl => "rftl",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetShape {
    #[default]
    Ball,
    Box,
    L1,
}

impl SetShape {
    /// Ball of radius `size`, cube of half-width `size` or l1-ball of radius
    /// `size` in `dim` dimensions.
    pub fn build(self, dim: usize, size: f64) -> pfol_core::Result<FeasibleSet> {
        match self {
            SetShape::Ball => FeasibleSet::ball(dim, size),
            SetShape::Box => FeasibleSet::cube(dim, size),
            SetShape::L1 => FeasibleSet::l1_ball(dim, size),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Manual parameter choices; anything left unset follows the automatic
/// schedule for the algorithm.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    /// Bandit perturbation radius; sets `c = delta T^{1/3}`.
    #[serde(default)]
    pub delta: Option<f64>,
    /// Bandit constant `c` with `delta = c T^{-1/3}`.
    #[serde(default)]
    pub c: Option<f64>,
    /// Bandit block length.
    #[serde(default, rename = "K")]
    pub block: Option<u64>,
    #[serde(default, rename = "T0")]
    pub t0: Option<f64>,
    #[serde(default)]
    pub b_constant: BConstant,
    #[serde(default)]
    pub epsilon_rule: Option<EpsilonRule>,
    #[serde(default)]
    pub solve_mode: SolveMode,
    /// Starting point; the origin when absent.
    #[serde(default)]
    pub x1: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub algo: Algo,
    #[serde(default)]
    pub set: SetShape,
    #[serde(default = "unit")]
    pub set_size: f64,
    pub dim: usize,
    #[serde(rename = "T")]
    pub horizons: Vec<u64>,
    pub seeds: Vec<u64>,
    pub adversary: AdversarySpec,
    #[serde(default)]
    pub overrides: Overrides,
    /// Per-step invariant checks; costs one projection per round.
    #[serde(default)]
    pub verify: bool,
    /// Fill the `wall_ms` column. Off by default so output bytes depend only
    /// on the experiment.
    #[serde(default)]
    pub timing: bool,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

fn unit() -> f64 {
    1.0
}

impl ExperimentSpec {
    pub fn new(algo: Algo, set: SetShape, dim: usize, adversary: AdversarySpec) -> Self {
        ExperimentSpec {
            algo,
            set,
            set_size: 1.0,
            dim,
            horizons: Vec::new(),
            seeds: Vec::new(),
            adversary,
            overrides: Overrides::default(),
            verify: false,
            timing: false,
            output: None,
            format: OutputFormat::Csv,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = toml::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("experiment spec serializes to TOML")
    }

    pub fn feasible_set(&self) -> pfol_core::Result<FeasibleSet> {
        self.set.build(self.dim, self.set_size)
    }

    /// `(T, seed)` pairs in output order: horizons outer, seeds inner.
    pub fn cells(&self) -> Vec<(u64, u64)> {
        self.horizons
            .iter()
            .flat_map(|&t| self.seeds.iter().map(move |&s| (t, s)))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(HarnessError::Config("dim must be at least 1".into()));
        }
        if self.horizons.is_empty() || self.horizons.contains(&0) {
            return Err(HarnessError::Config("need at least one horizon, all >= 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(HarnessError::Config("need at least one seed".into()));
        }
        if !(self.adversary.alpha.is_finite() && self.adversary.alpha > 0.0) {
            return Err(HarnessError::Config(format!(
                "adversary alpha must be positive, got {}",
                self.adversary.alpha
            )));
        }
        if self.overrides.delta.is_some() && self.overrides.c.is_some() {
            return Err(HarnessError::Config("set at most one of delta and c".into()));
        }
        if let Some(x1) = &self.overrides.x1 {
            if x1.len() != self.dim {
                return Err(HarnessError::Config(format!(
                    "x1 has {} coordinates, expected {}",
                    x1.len(),
                    self.dim
                )));
            }
        }
        self.feasible_set()?;
        Ok(())
    }

    pub fn start_point(&self) -> Vec<f64> {
        self.overrides.x1.clone().unwrap_or_else(|| vec![0.0; self.dim])
    }
}
