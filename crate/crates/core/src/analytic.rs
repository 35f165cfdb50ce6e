//! Closed-form solutions of the hybrid equations of motion.
//!
//! With the photon arm-A weight fixed at one, the mirror is a shifted free
//! oscillator around `q_eq = kappa / sqrt(2)` and arm A picks up the phase
//! `Theta(tau) = integral of (omega_ratio - sqrt(2) kappa q(s)) ds`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::HybridState;
use crate::params::DimensionlessParams;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MirrorPhasePoint {
    pub q0: f64,
    pub pi0: f64,
}

impl MirrorPhasePoint {
    pub fn new(q0: f64, pi0: f64) -> Self {
        MirrorPhasePoint { q0, pi0 }
    }
}

/// Amplitude and phase of the mirror oscillation, `q = amp sin(tau + phase) + q_eq`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillationParams {
    pub amp: f64,
    pub phase: f64,
}

/// Off-diagonal element `rho_AB` of the photon density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceSample {
    pub re: f64,
    pub im: f64,
}

impl CoherenceSample {
    pub fn modulus(&self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

impl From<Complex64> for CoherenceSample {
    fn from(c: Complex64) -> Self {
        CoherenceSample { re: c.re, im: c.im }
    }
}

pub fn oscillation_from_ic(m: &MirrorPhasePoint, p: &DimensionlessParams) -> OscillationParams {
    let dq = m.q0 - p.equilibrium_q();
    let amp = dq.hypot(m.pi0);
    if amp == 0.0 {
        return OscillationParams { amp: 0.0, phase: 0.0 };
    }
    let mut phase = dq.atan2(m.pi0);
    // atan2 gives [-pi, pi]; fold -pi onto pi
    if phase == -std::f64::consts::PI {
        phase = std::f64::consts::PI;
    }
    OscillationParams { amp, phase }
}

/// Mirror `(q, pi)` at `tau`.
pub fn mirror_trajectory(o: &OscillationParams, p: &DimensionlessParams, tau: f64) -> (f64, f64) {
    let (s, c) = (tau + o.phase).sin_cos();
    (o.amp * s + p.equilibrium_q(), o.amp * c)
}

/// Mirror-induced part of the arm-A phase, `Theta(tau) - omega_ratio tau`.
///
/// Independent of `omega_ratio`, so the coherence built from it is too.
pub fn mirror_phase(o: &OscillationParams, p: &DimensionlessParams, tau: f64) -> f64 {
    -p.kappa2() * tau + SQRT_2 * p.kappa * o.amp * ((tau + o.phase).cos() - o.phase.cos())
}

/// Accumulated arm-A phase `Theta(tau)`, unwrapped.
pub fn arm_a_phase(o: &OscillationParams, p: &DimensionlessParams, tau: f64) -> f64 {
    (p.omega_ratio - p.kappa2()) * tau + SQRT_2 * p.kappa * o.amp * ((tau + o.phase).cos() - o.phase.cos())
}

pub fn photon_arm_a(o: &OscillationParams, p: &DimensionlessParams, tau: f64) -> (f64, f64) {
    let (s, c) = arm_a_phase(o, p, tau).sin_cos();
    (c, -s)
}

pub fn photon_arm_b(p: &DimensionlessParams, tau: f64) -> (f64, f64) {
    let (s, c) = (p.omega_ratio * tau).sin_cos();
    (c, -s)
}

/// Full closed-form state at `tau` for the standard fifty-fifty preparation.
pub fn closed_form_state(m: &MirrorPhasePoint, p: &DimensionlessParams, tau: f64) -> HybridState {
    let o = oscillation_from_ic(m, p);
    let (q, pi) = mirror_trajectory(&o, p, tau);
    let (a_a, b_a) = photon_arm_a(&o, p, tau);
    let (a_b, b_b) = photon_arm_b(p, tau);
    HybridState { q, pi, a_a, b_a, a_b, b_b }
}

/// `rho_AB = (1/2)(aA + i bA)(aB - i bB) = (1/2) exp(-i Phi)` for a mirror
/// starting exactly at `m`.
pub fn rho_ab_pointlike(m: &MirrorPhasePoint, p: &DimensionlessParams, tau: f64) -> CoherenceSample {
    let o = oscillation_from_ic(m, p);
    let (s, c) = mirror_phase(&o, p, tau).sin_cos();
    CoherenceSample { re: 0.5 * c, im: -0.5 * s }
}

/// `rho_AB` assembled from an arbitrary (e.g. numerically integrated) state.
pub fn rho_ab_from_state(s: &HybridState) -> CoherenceSample {
    (Complex64::new(s.a_a, s.b_a) * Complex64::new(s.a_b, -s.b_b) * 0.5).into()
}
