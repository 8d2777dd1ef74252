use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pfol_core::losses::{AdversaryKind, AdversarySpec};
use pfol_harness::config::{Algo, ExperimentSpec, OutputFormat, SetShape};
use pfol_harness::experiment::{cell_bounds, prepare_cell, run_experiment, CellParams, RunOptions};
use pfol_harness::fit::{fit_slope, mean_by_horizon};
use pfol_harness::output::write_rows;

#[derive(Parser)]
#[command(name = "pfol", version, about = "Projection-free online learning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (T, seed) cell and emit one row per cell.
    Run(ExperimentArgs),
    /// Run a sweep and also fit the log-log growth exponent of mean regret.
    Sweep(ExperimentArgs),
    /// Run with invariant checks and print the per-cell reports.
    Verify(ExperimentArgs),
    /// Print the resolved parameters and bounds of every cell without running.
    Bounds(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Ofw,
    OfwBandit,
    Ogd,
    Rftl,
}

#[derive(Clone, Copy, ValueEnum)]
enum SetArg {
    Ball,
    Box,
    L1,
}

#[derive(Clone, Copy, ValueEnum)]
enum AdversaryArg {
    Fixed,
    Drifting,
    Corners,
    Iid,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct ExperimentArgs {
    /// TOML experiment spec; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    algo: Option<AlgoArg>,
    #[arg(long, value_enum)]
    set: Option<SetArg>,
    /// Radius (ball, l1) or half-width (box) of the feasible set.
    #[arg(long)]
    set_size: Option<f64>,
    #[arg(long)]
    dim: Option<usize>,
    /// Horizon; repeat for a sweep.
    #[arg(long = "T")]
    horizons: Vec<u64>,
    /// Seed; repeat for several seeds.
    #[arg(long = "seed")]
    seeds: Vec<u64>,
    #[arg(long, value_enum)]
    adversary: Option<AdversaryArg>,
    /// Step length of the drifting adversary.
    #[arg(long, default_value_t = 0.05)]
    drift_step: f64,
    #[arg(long)]
    alpha: Option<f64>,
    /// Bandit perturbation radius.
    #[arg(long)]
    delta: Option<f64>,
    /// Bandit block length.
    #[arg(long = "K")]
    block: Option<u64>,
    #[arg(long = "T0")]
    t0: Option<f64>,
    #[arg(long)]
    verify: bool,
    /// Fill the wall_ms column with measured run times.
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Worker threads (0 = all cores). PFOL_THREADS takes precedence.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

impl ExperimentArgs {
    fn spec(&self) -> Result<ExperimentSpec> {
        let mut spec = match &self.config {
            Some(path) => ExperimentSpec::from_file(path).with_context(|| format!("loading {}", path.display()))?,
            None => {
                let Some(algo) = self.algo else {
                    bail!("--algo is required without --config");
                };
                let dim = self.dim.unwrap_or(2);
                ExperimentSpec::new(
                    algo_of(algo),
                    SetShape::Ball,
                    dim,
                    AdversarySpec::new(AdversaryKind::DriftingCenter { step: self.drift_step }, 1.0),
                )
            }
        };
        if let Some(a) = self.algo {
            spec.algo = algo_of(a);
        }
        if let Some(s) = self.set {
            spec.set = match s {
                SetArg::Ball => SetShape::Ball,
                SetArg::Box => SetShape::Box,
                SetArg::L1 => SetShape::L1,
            };
        }
        if let Some(size) = self.set_size {
            spec.set_size = size;
        }
        if let Some(d) = self.dim {
            spec.dim = d;
        }
        if !self.horizons.is_empty() {
            spec.horizons = self.horizons.clone();
        }
        if !self.seeds.is_empty() {
            spec.seeds = self.seeds.clone();
        }
        if spec.seeds.is_empty() {
            spec.seeds = vec![0];
        }
        if let Some(adv) = self.adversary {
            spec.adversary.kind = match adv {
                AdversaryArg::Fixed => AdversaryKind::FixedCenter { center: None },
                AdversaryArg::Drifting => AdversaryKind::DriftingCenter { step: self.drift_step },
                AdversaryArg::Corners => AdversaryKind::AlternatingCorners,
                AdversaryArg::Iid => AdversaryKind::IidRandomCenter,
            };
        }
        if let Some(a) = self.alpha {
            spec.adversary.alpha = a;
        }
        if let Some(d) = self.delta {
            spec.overrides.delta = Some(d);
            spec.overrides.c = None;
        }
        if let Some(k) = self.block {
            spec.overrides.block = Some(k);
        }
        if let Some(t0) = self.t0 {
            spec.overrides.t0 = Some(t0);
        }
        spec.verify |= self.verify;
        spec.timing |= self.timing;
        if let Some(out) = &self.out {
            spec.output = Some(out.clone());
        }
        if let Some(f) = self.format {
            spec.format = match f {
                FormatArg::Csv => OutputFormat::Csv,
                FormatArg::Json => OutputFormat::Json,
            };
        }
        spec.validate()?;
        Ok(spec)
    }

    fn threads(&self) -> Result<usize> {
        match std::env::var("PFOL_THREADS") {
            Ok(v) => v
                .trim()
                .parse()
                .with_context(|| format!("PFOL_THREADS must be a thread count, got {v:?}")),
            Err(_) => Ok(self.threads),
        }
    }
}

fn algo_of(a: AlgoArg) -> Algo {
    match a {
        AlgoArg::Ofw => Algo::Ofw,
        AlgoArg::OfwBandit => Algo::OfwBandit,
        AlgoArg::Ogd => Algo::Ogd,
        AlgoArg::Rftl => Algo::Rftl,
    }
}

fn open_output(spec: &ExperimentSpec) -> Result<Box<dyn Write>> {
    Ok(match &spec.output {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(args: &ExperimentArgs, verify: bool, fit: bool) -> Result<bool> {
    let mut spec = args.spec()?;
    spec.verify |= verify;
    let options = RunOptions {
        threads: args.threads()?,
        keep_traces: false,
    };
    let result = run_experiment(&spec, options)?;
    let rows = result.rows();
    let mut out = open_output(&spec)?;
    write_rows(&rows, spec.format, &mut out)?;
    out.flush()?;

    let mut ok = true;
    for (cell, err) in result.failures() {
        eprintln!("cell T={} seed={} failed: {err}", cell.horizon, cell.seed);
        ok = false;
    }
    if spec.verify {
        for (cell, report) in result.reports() {
            eprintln!("# {} T={} seed={}", spec.algo.label(), cell.horizon, cell.seed);
            eprint!("{report}");
            ok &= report.passed();
        }
    }
    if fit {
        let (ts, means) = mean_by_horizon(rows.iter().map(|r| (r.horizon, r.regret)));
        match fit_slope(&ts, &means) {
            Ok(f) => eprintln!(
                "fitted regret exponent {:.4} (r^2 {:.4}, {} horizons; 2/3 = 0.6667)",
                f.exponent, f.r_squared, f.points
            ),
            Err(e) => eprintln!("no exponent fit: {e}"),
        }
    }
    Ok(ok)
}

fn bounds(args: &ExperimentArgs) -> Result<()> {
    let spec = args.spec()?;
    let mut entries = Vec::new();
    for (t, seed) in spec.cells() {
        let cell = prepare_cell(&spec, t, seed)?;
        let b = cell_bounds(&cell);
        let loss_bounds = cell.losses.bounds();
        let params = match &cell.params {
            CellParams::Ofw(cfg) => serde_json::to_value(cfg)?,
            CellParams::OfwBandit(cfg) => serde_json::to_value(cfg)?,
            other => serde_json::to_value(other)?,
        };
        entries.push(serde_json::json!({
            "T": t,
            "seed": seed,
            "M": loss_bounds.value_bound,
            "G": loss_bounds.gradient_bound,
            "alpha": loss_bounds.alpha,
            "r": cell.set.inner_radius(),
            "R": cell.set.outer_radius(),
            "params": params,
            "bound_regret": b.regret,
            "bound_lmo": b.lmo_calls,
        }));
    }
    let mut out = open_output(&spec)?;
    serde_json::to_writer_pretty(&mut out, &entries)?;
    writeln!(out)?;
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let ok = match &cli.command {
        Command::Run(a) => run(a, false, false)?,
        Command::Sweep(a) => run(a, false, true)?,
        Command::Verify(a) => run(a, true, false)?,
        Command::Bounds(a) => {
            bounds(a)?;
            true
        }
    };
    if !ok {
        std::process::exit(1);
    }
    Ok(())
}
