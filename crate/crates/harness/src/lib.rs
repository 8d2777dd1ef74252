//! Experiment harness for projection-free online learning: declarative
//! experiment specs, seeded sweeps over horizons and seeds, regret and
//! invariant verification, growth-exponent fits and CSV/JSON output.

pub mod config;
pub mod error;
pub mod experiment;
pub mod fit;
pub mod output;
pub mod regret;
pub mod verify;

pub use config::{Algo, ExperimentSpec, OutputFormat, Overrides, SetShape};
pub use error::{HarnessError, Result};
pub use experiment::{run_cell, run_experiment, CellArtifacts, ExperimentResult, RunOptions};
pub use fit::{fit_slope, SlopeFit};
pub use output::{Row, CSV_HEADER};
pub use regret::compute_regret;
pub use verify::{Check, VerifyReport};
