//! Averaged photon density matrix and detector click probabilities.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::rho_ab_pointlike;
use crate::decoherence::{averaged_rho_closed, one_minus_cos, theta, AveragedCoherence, MirrorModel, ThermalEnsemble};
use crate::params::DerivedParams;

pub type Matrix2 = [[Complex64; 2]; 2];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DetectionError {
    #[error("coherence modulus {0} exceeds 1/2")]
    Inconsistent(f64),
}

/// `[[1/2, c], [c*, 1/2]]` in the {arm A, arm B} basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AveragedDensityMatrix {
    pub m: Matrix2,
}

impl AveragedDensityMatrix {
    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1]
    }

    /// Eigenvalues in ascending order, `1/2 -+ |c|`.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let c = self.m[0][1].norm();
        [0.5 - c, 0.5 + c]
    }

    pub fn is_hermitian(&self) -> bool {
        self.m[0][1] == self.m[1][0].conj() && self.m[0][0].im == 0.0 && self.m[1][1].im == 0.0
    }
}

pub fn averaged_density_matrix(c: &AveragedCoherence) -> Result<AveragedDensityMatrix, DetectionError> {
    let slack = 1e-9 + 3.0 * c.stderr_re.hypot(c.stderr_im);
    let modulus = c.modulus();
    if !(modulus <= 0.5 + slack) {
        return Err(DetectionError::Inconsistent(modulus));
    }
    let half = Complex64::new(0.5, 0.0);
    let off = c.as_complex();
    Ok(AveragedDensityMatrix { m: [[half, off], [off.conj(), half]] })
}

pub fn matmul(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j]))
}

/// Projectors onto the two detector ports.
pub fn detector_projectors() -> (Matrix2, Matrix2) {
    let h = Complex64::new(0.5, 0.0);
    ([[h, h], [h, h]], [[h, -h], [-h, h]])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorProbabilities {
    pub p1: f64,
    pub p2: f64,
}

impl DetectorProbabilities {
    /// Builds the pair from `p1` so that `p1 + p2 == 1` holds in floating
    /// point: the smaller probability is kept and the larger is `1 - small`.
    pub fn from_p1(p1: f64) -> Self {
        let p1 = p1.clamp(0.0, 1.0);
        if p1 <= 0.5 {
            DetectorProbabilities { p1, p2: 1.0 - p1 }
        } else {
            let p2 = 1.0 - p1;
            DetectorProbabilities { p1: 1.0 - p2, p2 }
        }
    }
}

/// `Tr(rho P_i)` for both projectors.
pub fn probabilities_from_matrix(rho: &AveragedDensityMatrix) -> DetectorProbabilities {
    let (p1, _) = detector_projectors();
    let prod = matmul(&rho.m, &p1);
    DetectorProbabilities::from_p1((prod[0][0] + prod[1][1]).re)
}

/// Trace-formula route: density matrix from the averaged coherence, then
/// `Tr(rho P_1)`.
pub fn detection_probabilities_trace(model: &MirrorModel, p: &DerivedParams, tau: f64) -> DetectorProbabilities {
    let d = p.dimensionless();
    let c = averaged_rho_closed(&ThermalEnsemble { x_th: d.x_th }, &d, tau, model);
    let rho = averaged_density_matrix(&c).expect("closed-form coherence is bounded by 1/2");
    probabilities_from_matrix(&rho)
}

/// Closed-form route: `(1/2){1 +- cos[phase] exp[-z^2 (1 - cos tau)]}`.
///
/// For a pointlike mirror the phase is the full pointlike phase, which
/// reduces to `kappa^2 (tau - sin tau)` for a mirror starting at the origin.
pub fn detection_probabilities_closed(model: &MirrorModel, p: &DerivedParams, tau: f64) -> DetectorProbabilities {
    let (phase_cos, z2) = match model {
        MirrorModel::ClassicalPointlike(m) => (2.0 * rho_ab_pointlike(m, &p.dimensionless(), tau).re, 0.0),
        MirrorModel::ClassicalThermal => ((p.kappa2 * theta(tau)).cos(), p.z_cl2),
        MirrorModel::QuantumThermal => ((p.kappa2 * theta(tau)).cos(), p.z_qm2),
    };
    let envelope = if z2 == 0.0 { 1.0 } else { (-z2 * one_minus_cos(tau)).exp() };
    DetectorProbabilities::from_p1(0.5 * (1.0 + phase_cos * envelope))
}

pub fn detection_probabilities(model: &MirrorModel, p: &DerivedParams, tau: f64) -> DetectorProbabilities {
    detection_probabilities_trace(model, p, tau)
}
