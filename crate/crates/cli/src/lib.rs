//! Scenario runner behind the `optohybrid` binary: each scenario writes its
//! CSV/JSON (and optional SVG) files into the output directory, evaluates a
//! set of pass/fail checks, and records everything in `report.json` with
//! SHA-256 digests of the files it wrote.

pub mod config;
pub mod scenarios;
pub mod svg;

use std::path::{Path, PathBuf};

use optohybrid::DerivedParams;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use config::{RunConfig, Scenario, TemperatureSweep};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Params(#[from] optohybrid::params::ParamsError),
    #[error(transparent)]
    Dynamics(#[from] optohybrid::dynamics::DynamicsError),
    #[error(transparent)]
    Decoherence(#[from] optohybrid::decoherence::DecoherenceError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `value <= threshold`; NaN fails.
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check { name: name.into(), value, threshold, passed: value <= threshold }
    }

    /// Passes when `value >= threshold`; NaN fails.
    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check { name: name.into(), value, threshold, passed: value >= threshold }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileEntry {
    /// Relative to the output directory.
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

/// Writes files into the output directory and keeps the manifest.
pub struct Emitter {
    dir: PathBuf,
    pub files: Vec<FileEntry>,
}

impl Emitter {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_owned(), source })?;
        Ok(Emitter { dir: dir.to_owned(), files: Vec::new() })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|source| CliError::Io { path, source })?;
        self.files.push(FileEntry {
            path: name.to_owned(),
            bytes: contents.len(),
            sha256: sha256_hex(contents.as_bytes()),
        });
        Ok(())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub scenario: String,
    pub config: RunConfig,
    pub derived: DerivedParams,
    pub checks: Vec<Check>,
    pub files: Vec<FileEntry>,
    pub passed: bool,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Runs `scenario` and writes its files plus `report.json` to `cfg.out`.
pub fn run(scenario: Scenario, cfg: &RunConfig) -> Result<Report, CliError> {
    cfg.validate(scenario)?;
    let derived = cfg.params.derive()?;
    let mut em = Emitter::new(&cfg.out)?;
    let checks = match scenario {
        Scenario::Derive => scenarios::derive(cfg, &mut em)?,
        Scenario::Trajectory => scenarios::trajectory(cfg, &mut em)?,
        Scenario::Visibility => scenarios::visibility_scenario(cfg, &mut em)?,
        Scenario::Detect => scenarios::detect(cfg, &mut em)?,
        Scenario::EtaSweep => scenarios::eta_sweep(cfg, &mut em)?,
        Scenario::Validate => scenarios::validate(cfg, &mut em)?,
        Scenario::McConvergence => scenarios::mc_convergence(cfg, &mut em)?,
    };
    let passed = checks.iter().all(|c| c.passed);
    let report = Report {
        scenario: scenario.name().to_owned(),
        config: cfg.clone(),
        derived,
        checks,
        files: em.files,
        passed,
    };
    let path = cfg.out.join("report.json");
    std::fs::write(&path, report.to_json()).map_err(|source| CliError::Io { path, source })?;
    Ok(report)
}
