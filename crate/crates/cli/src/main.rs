use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use optohybrid_cli::{run, RunConfig, Scenario};

/// Single photon in a Michelson interferometer with a classical oscillating
/// mirror: parameter derivation, trajectories, visibility, detection and
/// self-validation.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Args {
    /// Scenario to run
    #[arg(value_enum)]
    scenario: Scenario,

    /// JSON run configuration; flags override its keys
    #[arg(short, long)]
    config: Option<PathBuf>,

    /// Output directory
    #[arg(short, long)]
    out: Option<PathBuf>,

    /// Monte Carlo seed
    #[arg(long)]
    seed: Option<u64>,

    /// Monte Carlo sample count
    #[arg(long)]
    samples: Option<usize>,

    /// Gauss-Hermite nodes per axis
    #[arg(long)]
    order: Option<usize>,

    /// End of the scaled time grid
    #[arg(long)]
    tau_max: Option<f64>,

    /// Number of grid points
    #[arg(long)]
    points: Option<usize>,

    /// Monte Carlo worker threads (results do not depend on it)
    #[arg(long)]
    workers: Option<usize>,

    /// Also write SVG plots
    #[arg(long)]
    svg: bool,
}

impl Args {
    fn config(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(out) = &self.out {
            cfg.out = out.clone();
        }
        cfg.seed = self.seed.unwrap_or(cfg.seed);
        cfg.samples = self.samples.unwrap_or(cfg.samples);
        cfg.order = self.order.unwrap_or(cfg.order);
        cfg.tau_max = self.tau_max.unwrap_or(cfg.tau_max);
        cfg.points = self.points.unwrap_or(cfg.points);
        cfg.workers = self.workers.or(cfg.workers);
        cfg.svg |= self.svg;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = args.config().and_then(|cfg| {
        run(args.scenario, &cfg).with_context(|| format!("scenario {} failed", args.scenario.name()))
    });
    let report = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    for c in &report.checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        println!("{tag} {} value={:e} threshold={:e}", c.name, c.value, c.threshold);
    }
    for f in &report.files {
        println!("wrote {} ({} bytes, sha256 {})", f.path, f.bytes, f.sha256);
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
