//! Run configuration: one flat JSON object whose keys match the CLI flags.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use optohybrid::{MirrorPhasePoint, ParamsInput, ReducedParams};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Derive,
    Trajectory,
    Visibility,
    Detect,
    EtaSweep,
    Validate,
    McConvergence,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Derive => "derive",
            Scenario::Trajectory => "trajectory",
            Scenario::Visibility => "visibility",
            Scenario::Detect => "detect",
            Scenario::EtaSweep => "eta-sweep",
            Scenario::Validate => "validate",
            Scenario::McConvergence => "mc-convergence",
        }
    }
}

/// Log-spaced temperature sweep (K).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemperatureSweep {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

impl TemperatureSweep {
    pub fn temperatures(&self) -> Vec<f64> {
        let (a, b) = (self.t_min.ln(), self.t_max.ln());
        (0..self.points)
            .map(|i| {
                if self.points == 1 {
                    self.t_min
                } else {
                    (a + (b - a) * i as f64 / (self.points - 1) as f64).exp()
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub params: ParamsInput,
    /// Temperatures (K) for the visibility and detect scenarios; empty means
    /// the temperature in `params`.
    pub temperatures: Vec<f64>,
    pub tau_max: f64,
    pub points: usize,
    pub samples: usize,
    pub seed: u64,
    /// Monte Carlo worker threads; never changes results, so it is left out
    /// of the report.
    #[serde(skip_serializing)]
    pub workers: Option<usize>,
    /// Sample counts for `mc-convergence`.
    pub ladder: Vec<usize>,
    /// Scaled time at which `mc-convergence` evaluates the average.
    pub mc_tau: f64,
    /// Per-axis Gauss-Hermite order.
    pub order: usize,
    pub initial_mirror: MirrorPhasePoint,
    /// Fixed RK4 step for `trajectory`; defaults to `2e-3 / omega_ratio`.
    pub step: Option<f64>,
    pub eta_sweep: TemperatureSweep,
    #[serde(skip_serializing)]
    pub out: PathBuf,
    pub svg: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: ParamsInput::Dimensionless(ReducedParams {
                kappa: 1.0,
                omega_ratio: 10.0,
                mirror_freq: 2.0 * PI * 500.0,
                temperature: Some(1e-3),
                x_th: None,
                mass: None,
            }),
            temperatures: vec![1e-3, 1e-4],
            tau_max: 4.0 * PI,
            points: 2000,
            samples: 100_000,
            seed: 42,
            workers: None,
            ladder: vec![1_000, 10_000, 100_000],
            mc_tau: 1.0,
            order: 160,
            initial_mirror: MirrorPhasePoint::new(0.3, -0.7),
            step: None,
            eta_sweep: TemperatureSweep { t_min: 1e-6, t_max: 1e-3, points: 31 },
            out: PathBuf::from("out"),
            svg: false,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })?;
        serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self, scenario: Scenario) -> Result<(), CliError> {
        self.params.derive().map_err(|e| usage(format!("params: {e}")))?;
        if !(self.tau_max.is_finite() && self.tau_max > 0.0) {
            return Err(usage(format!("tau_max: must be positive, got {}", self.tau_max)));
        }
        if self.points < 2 {
            return Err(usage(format!("points: need at least 2, got {}", self.points)));
        }
        if self.samples < 2 {
            return Err(usage(format!("samples: need at least 2, got {}", self.samples)));
        }
        if self.order < 2 {
            return Err(usage(format!("order: need at least 2, got {}", self.order)));
        }
        if self.workers == Some(0) {
            return Err(usage("workers: must be positive"));
        }
        if let Some(t) = self.temperatures.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(usage(format!("temperatures: invalid entry {t}")));
        }
        if let Some(h) = self.step {
            if !(h.is_finite() && h > 0.0) {
                return Err(usage(format!("step: must be positive, got {h}")));
            }
        }
        let sweep = &self.eta_sweep;
        if scenario == Scenario::EtaSweep
            && !(sweep.t_min > 0.0 && sweep.t_max >= sweep.t_min && sweep.t_max.is_finite() && sweep.points >= 1)
        {
            return Err(usage("eta_sweep: need 0 < t_min <= t_max and points >= 1"));
        }
        if scenario == Scenario::McConvergence {
            if self.ladder.len() < 3 {
                return Err(usage(format!("ladder: need at least 3 rungs, got {}", self.ladder.len())));
            }
            if self.ladder.windows(2).any(|w| w[1] <= w[0]) || self.ladder[0] < 2 {
                return Err(usage("ladder: sample counts must be increasing and >= 2"));
            }
        }
        Ok(())
    }

    /// Parameters with the temperature replaced by `t`.
    pub fn params_at(&self, t: f64) -> ParamsInput {
        match self.params {
            ParamsInput::Si(p) => ParamsInput::Si(optohybrid::PhysicalParams { temperature: t, ..p }),
            ParamsInput::Dimensionless(r) => {
                ParamsInput::Dimensionless(ReducedParams { temperature: Some(t), x_th: None, ..r })
            }
        }
    }

    /// The sweep temperatures, or `None` meaning "as given in `params`".
    pub fn temperature_list(&self) -> Vec<Option<f64>> {
        if self.temperatures.is_empty() {
            vec![None]
        } else {
            self.temperatures.iter().copied().map(Some).collect()
        }
    }
}
