//! Hybrid state, Hamiltonian, equations of motion and numerical integration.

use std::fmt::Write as _;
use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::DimensionlessParams;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("invalid step control: {0}")]
    Config(String),
    #[error("integration failed: non-finite state at tau = {tau}")]
    BlowUp { tau: f64 },
}

/// Mirror phase-space point plus both photon arms, all in scaled units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HybridState {
    pub q: f64,
    pub pi: f64,
    pub a_a: f64,
    pub b_a: f64,
    pub a_b: f64,
    pub b_b: f64,
}

/// `d/dtau` of a [`HybridState`].
pub type StateDerivative = HybridState;

impl HybridState {
    /// Fifty-fifty photon with both arms at zero phase and the mirror at `(q, pi)`.
    pub fn prepared(q: f64, pi: f64) -> Self {
        HybridState { q, pi, a_a: 1.0, b_a: 0.0, a_b: 1.0, b_b: 0.0 }
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.q, self.pi, self.a_a, self.b_a, self.a_b, self.b_b]
    }

    pub fn from_array(v: [f64; 6]) -> Self {
        HybridState { q: v[0], pi: v[1], a_a: v[2], b_a: v[3], a_b: v[4], b_b: v[5] }
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|x| x.is_finite())
    }

    pub fn arm_a_weight(&self) -> f64 {
        self.a_a * self.a_a + self.b_a * self.b_a
    }

    pub fn arm_b_weight(&self) -> f64 {
        self.a_b * self.a_b + self.b_b * self.b_b
    }

    pub fn max_abs_diff(&self, other: &HybridState) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Add for HybridState {
    type Output = HybridState;

    fn add(self, o: HybridState) -> HybridState {
        HybridState {
            q: self.q + o.q,
            pi: self.pi + o.pi,
            a_a: self.a_a + o.a_a,
            b_a: self.b_a + o.b_a,
            a_b: self.a_b + o.a_b,
            b_b: self.b_b + o.b_b,
        }
    }
}

impl Mul<f64> for HybridState {
    type Output = HybridState;

    fn mul(self, h: f64) -> HybridState {
        HybridState {
            q: self.q * h,
            pi: self.pi * h,
            a_a: self.a_a * h,
            b_a: self.b_a * h,
            a_b: self.a_b * h,
            b_b: self.b_b * h,
        }
    }
}

/// `H / (hbar Omega)`.
///
/// The interaction enters with a minus sign so that [`eom_rhs`] is exactly
/// the Hamiltonian flow of this function.
pub fn hybrid_energy(s: &HybridState, p: &DimensionlessParams) -> f64 {
    let n_a = s.arm_a_weight();
    0.5 * (s.pi * s.pi + s.q * s.q) + 0.5 * p.omega_ratio * (n_a + s.arm_b_weight())
        - 0.5 * SQRT_2 * p.kappa * s.q * n_a
}

pub fn eom_rhs(s: &HybridState, p: &DimensionlessParams) -> StateDerivative {
    let rate_a = p.omega_ratio - SQRT_2 * p.kappa * s.q;
    HybridState {
        q: s.pi,
        pi: -s.q + p.kappa * std::f64::consts::FRAC_1_SQRT_2 * s.arm_a_weight(),
        a_a: rate_a * s.b_a,
        b_a: -rate_a * s.a_a,
        a_b: p.omega_ratio * s.b_b,
        b_b: -p.omega_ratio * s.a_b,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Conserved {
    pub n_a: f64,
    pub n_b: f64,
    pub energy: f64,
}

pub fn conserved_quantities(s: &HybridState, p: &DimensionlessParams) -> Conserved {
    Conserved {
        n_a: s.arm_a_weight(),
        n_b: s.arm_b_weight(),
        energy: hybrid_energy(s, p),
    }
}

/// Step control for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepControl {
    /// Classical RK4 with a fixed step (clipped to land on output samples).
    Fixed { step: f64 },
    /// RK4 with step-doubling error estimate and local extrapolation.
    Adaptive { tolerance: f64 },
}

impl StepControl {
    fn validate(&self) -> Result<(), DynamicsError> {
        match *self {
            StepControl::Fixed { step } if !(step.is_finite() && step > 0.0) => {
                Err(DynamicsError::Config(format!("step must be positive, got {step}")))
            }
            StepControl::Adaptive { tolerance } if !(tolerance.is_finite() && tolerance > 0.0) => {
                Err(DynamicsError::Config(format!("tolerance must be positive, got {tolerance}")))
            }
            _ => Ok(()),
        }
    }
}

fn rk4_step(s: &HybridState, p: &DimensionlessParams, h: f64) -> HybridState {
    let k1 = eom_rhs(s, p);
    let k2 = eom_rhs(&(*s + k1 * (0.5 * h)), p);
    let k3 = eom_rhs(&(*s + k2 * (0.5 * h)), p);
    let k4 = eom_rhs(&(*s + k3 * h), p);
    *s + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// Advances `s` by the signed interval `dtau`.
pub fn evolve(
    s: &HybridState,
    p: &DimensionlessParams,
    dtau: f64,
    control: StepControl,
) -> Result<HybridState, DynamicsError> {
    control.validate()?;
    advance(*s, p, 0.0, dtau, control)
}

fn advance(
    mut s: HybridState,
    p: &DimensionlessParams,
    tau0: f64,
    dtau: f64,
    control: StepControl,
) -> Result<HybridState, DynamicsError> {
    if dtau == 0.0 {
        return Ok(s);
    }
    let dir = dtau.signum();
    let span = dtau.abs();
    match control {
        StepControl::Fixed { step } => {
            let n = (span / step).ceil().max(1.0) as u64;
            let h = dir * span / n as f64;
            for i in 0..n {
                s = rk4_step(&s, p, h);
                if !s.is_finite() {
                    return Err(DynamicsError::BlowUp { tau: tau0 + h * (i + 1) as f64 });
                }
            }
            Ok(s)
        }
        StepControl::Adaptive { tolerance } => {
            let mut done = 0.0;
            let mut h = span.min(0.1 / (p.omega_ratio + 1.0));
            while done < span {
                let last = h >= span - done;
                if last {
                    h = span - done;
                }
                let full = rk4_step(&s, p, dir * h);
                let half = rk4_step(&s, p, dir * 0.5 * h);
                let twice = rk4_step(&half, p, dir * 0.5 * h);
                let err = twice.max_abs_diff(&full) / 15.0;
                if !err.is_finite() {
                    return Err(DynamicsError::BlowUp { tau: tau0 + dir * done });
                }
                if err <= tolerance {
                    let a = twice.as_array();
                    let b = full.as_array();
                    s = HybridState::from_array(std::array::from_fn(|i| a[i] + (a[i] - b[i]) / 15.0));
                    done = if last { span } else { done + h };
                }
                let factor = if err == 0.0 { 4.0 } else { 0.9 * (tolerance / err).powf(0.2) };
                h *= factor.clamp(0.2, 4.0);
                if h < span * 1e-15 {
                    return Err(DynamicsError::BlowUp { tau: tau0 + dir * done });
                }
            }
            Ok(s)
        }
    }
}

/// Per-sample residuals relative to the initial conserved quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub conserved: Conserved,
    pub n_a_drift: f64,
    pub n_b_drift: f64,
    pub energy_drift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub tau_grid: Vec<f64>,
    pub states: Vec<HybridState>,
    pub diagnostics: Vec<Diagnostics>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.tau_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau_grid.is_empty()
    }

    pub fn final_state(&self) -> &HybridState {
        self.states.last().expect("trajectory always holds the initial sample")
    }

    pub fn max_n_drift(&self) -> f64 {
        self.diagnostics
            .iter()
            .map(|d| d.n_a_drift.abs().max(d.n_b_drift.abs()))
            .fold(0.0, f64::max)
    }

    pub fn max_energy_drift(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.energy_drift.abs()).fold(0.0, f64::max)
    }

    /// CSV with header `tau,q,pi,aA,bA,aB,bB,nA,nB,energy`; floats use the
    /// shortest representation that round-trips.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau,q,pi,aA,bA,aB,bB,nA,nB,energy\n");
        for ((tau, s), d) in self.tau_grid.iter().zip(&self.states).zip(&self.diagnostics) {
            let c = &d.conserved;
            let _ = writeln!(
                out,
                "{tau:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
                s.q, s.pi, s.a_a, s.b_a, s.a_b, s.b_b, c.n_a, c.n_b, c.energy
            );
        }
        out
    }
}

/// Integrates from `tau = 0` to `tau_end`, recording `samples` uniformly
/// spaced outputs (both endpoints included).
pub fn integrate(
    s0: &HybridState,
    p: &DimensionlessParams,
    tau_end: f64,
    samples: usize,
    control: StepControl,
) -> Result<Trajectory, DynamicsError> {
    control.validate()?;
    if !(tau_end.is_finite() && tau_end > 0.0) {
        return Err(DynamicsError::Config(format!("tau_end must be positive, got {tau_end}")));
    }
    if samples < 2 {
        return Err(DynamicsError::Config("need at least two output samples".into()));
    }
    let start = conserved_quantities(s0, p);
    let diag = |s: &HybridState| {
        let c = conserved_quantities(s, p);
        Diagnostics {
            conserved: c,
            n_a_drift: c.n_a - start.n_a,
            n_b_drift: c.n_b - start.n_b,
            energy_drift: c.energy - start.energy,
        }
    };
    let mut tau_grid = Vec::with_capacity(samples);
    let mut states = Vec::with_capacity(samples);
    let mut diagnostics = Vec::with_capacity(samples);
    let mut s = *s0;
    let mut prev = 0.0;
    for i in 0..samples {
        let tau = tau_end * i as f64 / (samples - 1) as f64;
        s = advance(s, p, prev, tau - prev, control)?;
        prev = tau;
        tau_grid.push(tau);
        diagnostics.push(diag(&s));
        states.push(s);
    }
    Ok(Trajectory { tau_grid, states, diagnostics })
}
