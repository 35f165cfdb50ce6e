//! Physical inputs, SI to dimensionless conversion, and derived constants.
//!
//! Internally everything runs in scaled units: time `tau = Omega t`, mirror
//! position `q = x sqrt(M Omega / hbar)`, mirror momentum
//! `pi = p / sqrt(M Omega hbar)` and photon quadratures `a = X / sqrt(hbar)`,
//! `b = P / sqrt(hbar)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Reduced Planck constant, CODATA 2018 (J s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, CODATA 2018 (J/K).
pub const K_B: f64 = 1.380_649e-23;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamsError {
    #[error("parameter `{name}` must be finite and positive, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("temperature must be finite and non-negative, got {0}")]
    NegativeTemperature(f64),
    #[error("exactly one of `temperature` or `x_th` must be given")]
    TemperatureSpec,
    #[error("{0}")]
    Domain(&'static str),
}

fn positive(name: &'static str, value: f64) -> Result<f64, ParamsError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(ParamsError::NotPositive { name, value })
    }
}

fn temperature(value: f64) -> Result<f64, ParamsError> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(ParamsError::NegativeTemperature(value))
    }
}

/// Full SI description of the interferometer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Mirror mass (kg).
    pub mass: f64,
    /// Mirror angular frequency (rad/s).
    pub mirror_freq: f64,
    /// Photon angular frequency (rad/s).
    pub photon_freq: f64,
    /// Cavity length (m).
    pub cavity_length: f64,
    /// Temperature (K).
    pub temperature: f64,
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<(), ParamsError> {
        positive("mass", self.mass)?;
        positive("mirror_freq", self.mirror_freq)?;
        positive("photon_freq", self.photon_freq)?;
        positive("cavity_length", self.cavity_length)?;
        temperature(self.temperature)?;
        Ok(())
    }

    /// Optomechanical coupling `g = omega / L`.
    pub fn coupling(&self) -> f64 {
        self.photon_freq / self.cavity_length
    }

    pub fn kappa2(&self) -> f64 {
        let g = self.coupling();
        HBAR * g * g / (2.0 * self.mass * self.mirror_freq.powi(3))
    }

    pub fn to_dimensionless(&self) -> Result<DimensionlessParams, ParamsError> {
        self.validate()?;
        Ok(DimensionlessParams {
            kappa: self.kappa2().sqrt(),
            omega_ratio: self.photon_freq / self.mirror_freq,
            x_th: thermal_ratio(self.mirror_freq, self.temperature),
        })
    }

    /// Rebuilds SI parameters from the dimensionless triple, anchored on the
    /// mirror mass and frequency.
    pub fn from_dimensionless(
        d: &DimensionlessParams,
        mass: f64,
        mirror_freq: f64,
    ) -> Result<Self, ParamsError> {
        d.validate()?;
        positive("mass", mass)?;
        positive("mirror_freq", mirror_freq)?;
        let photon_freq = d.omega_ratio * mirror_freq;
        let g = (2.0 * mass * mirror_freq.powi(3) * d.kappa * d.kappa / HBAR).sqrt();
        let p = PhysicalParams {
            mass,
            mirror_freq,
            photon_freq,
            cavity_length: photon_freq / g,
            temperature: temperature_from_ratio(mirror_freq, d.x_th),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn scales(&self) -> Scales {
        Scales {
            position: (HBAR / (self.mass * self.mirror_freq)).sqrt(),
            momentum: (self.mass * self.mirror_freq * HBAR).sqrt(),
            quadrature: HBAR.sqrt(),
            time: 1.0 / self.mirror_freq,
        }
    }

    pub fn derive(&self) -> Result<DerivedParams, ParamsError> {
        let d = self.to_dimensionless()?;
        let mut out =
            DerivedParams::build_with_ratio(d.kappa * d.kappa, d.omega_ratio, self.mirror_freq, self.temperature, d.x_th);
        out.g = Some(self.coupling());
        Ok(out)
    }
}

/// Unit scales: multiply a scaled quantity by its scale to get SI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scales {
    pub position: f64,
    pub momentum: f64,
    pub quadrature: f64,
    pub time: f64,
}

/// The three numbers that fully determine the scaled dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessParams {
    pub kappa: f64,
    /// `omega / Omega`.
    pub omega_ratio: f64,
    /// `hbar Omega / (k_B T)`; `+inf` at zero temperature.
    pub x_th: f64,
}

impl DimensionlessParams {
    pub fn new(kappa: f64, omega_ratio: f64, x_th: f64) -> Result<Self, ParamsError> {
        let d = DimensionlessParams { kappa, omega_ratio, x_th };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<(), ParamsError> {
        if !(self.kappa.is_finite() && self.kappa >= 0.0) {
            return Err(ParamsError::NotPositive { name: "kappa", value: self.kappa });
        }
        positive("omega_ratio", self.omega_ratio)?;
        if self.x_th.is_nan() || self.x_th <= 0.0 {
            return Err(ParamsError::NotPositive { name: "x_th", value: self.x_th });
        }
        Ok(())
    }

    pub fn kappa2(&self) -> f64 {
        self.kappa * self.kappa
    }

    /// Scaled static displacement of the mirror under one photon in arm A.
    pub fn equilibrium_q(&self) -> f64 {
        self.kappa * std::f64::consts::FRAC_1_SQRT_2
    }
}

/// Reduced input mode: coupling and frequency ratio instead of mass and length.
///
/// Exactly one of `temperature` and `x_th` must be present. `mass` is optional
/// and only serves to recover the SI coupling `g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedParams {
    pub kappa: f64,
    pub omega_ratio: f64,
    pub mirror_freq: f64,
    #[serde(default)]
    pub temperature: Option<f64>,
    #[serde(default)]
    pub x_th: Option<f64>,
    #[serde(default)]
    pub mass: Option<f64>,
}

impl ReducedParams {
    pub fn temperature(&self) -> Result<f64, ParamsError> {
        positive("mirror_freq", self.mirror_freq)?;
        match (self.temperature, self.x_th) {
            (Some(t), None) => temperature(t),
            (None, Some(x)) => {
                if x.is_nan() || x <= 0.0 {
                    return Err(ParamsError::NotPositive { name: "x_th", value: x });
                }
                Ok(temperature_from_ratio(self.mirror_freq, x))
            }
            _ => Err(ParamsError::TemperatureSpec),
        }
    }

    pub fn derive(&self) -> Result<DerivedParams, ParamsError> {
        let t = self.temperature()?;
        // a given x_th is used as-is, not via the T round trip
        let x = self.x_th.unwrap_or_else(|| thermal_ratio(self.mirror_freq, t));
        let d = DimensionlessParams::new(self.kappa, self.omega_ratio, x)?;
        let mut out = DerivedParams::build_with_ratio(d.kappa2(), d.omega_ratio, self.mirror_freq, t, x);
        if let Some(m) = self.mass {
            let m = positive("mass", m)?;
            out.g = Some((2.0 * m * self.mirror_freq.powi(3) * out.kappa2 / HBAR).sqrt());
        }
        Ok(out)
    }
}

/// Parameter input, either `{"si": {...}}` or `{"dimensionless": {...}}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ParamsInput {
    Si(PhysicalParams),
    Dimensionless(ReducedParams),
}

impl ParamsInput {
    pub fn derive(&self) -> Result<DerivedParams, ParamsError> {
        match self {
            ParamsInput::Si(p) => p.derive(),
            ParamsInput::Dimensionless(r) => r.derive(),
        }
    }
}

/// Every constant the downstream analysis needs.
///
/// Serializes with the fixed field names `g, kappa2, omega_shift, x_th,
/// z_cl2, z_qm2, t_cl, t_qm`; non-finite values (zero temperature) become
/// `null`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedParams {
    /// SI coupling `omega / L`; unknown in the reduced mode without a mass.
    pub g: Option<f64>,
    pub kappa2: f64,
    /// `omega + kappa^2 Omega` (rad/s).
    pub omega_shift: f64,
    pub x_th: f64,
    pub z_cl2: f64,
    pub z_qm2: f64,
    pub t_cl: f64,
    pub t_qm: f64,
    #[serde(skip)]
    pub omega_ratio: f64,
    #[serde(skip)]
    pub mirror_freq: f64,
    #[serde(skip)]
    pub temperature: f64,
}

impl DerivedParams {
    fn build_with_ratio(kappa2: f64, omega_ratio: f64, mirror_freq: f64, temperature: f64, x_th: f64) -> Self {
        let z_cl2 = 2.0 * kappa2 / x_th;
        let z_qm2 = quantum_z2(kappa2, x_th);
        DerivedParams {
            g: None,
            kappa2,
            omega_shift: omega_ratio * mirror_freq + kappa2 * mirror_freq,
            x_th,
            z_cl2,
            z_qm2,
            t_cl: 1.0 / (z_cl2.sqrt() * mirror_freq),
            t_qm: 1.0 / (z_qm2.sqrt() * mirror_freq),
            omega_ratio,
            mirror_freq,
            temperature,
        }
    }

    pub fn dimensionless(&self) -> DimensionlessParams {
        DimensionlessParams {
            kappa: self.kappa2.sqrt(),
            omega_ratio: self.omega_ratio,
            x_th: self.x_th,
        }
    }

    pub fn z_cl(&self) -> f64 {
        self.z_cl2.sqrt()
    }

    pub fn z_qm(&self) -> f64 {
        self.z_qm2.sqrt()
    }

    pub fn is_zero_temperature(&self) -> bool {
        self.x_th.is_infinite()
    }
}

/// `hbar Omega / (k_B T)`, `+inf` at `T = 0`.
pub fn thermal_ratio(mirror_freq: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        f64::INFINITY
    } else {
        HBAR * mirror_freq / (K_B * temperature)
    }
}

fn temperature_from_ratio(mirror_freq: f64, x_th: f64) -> f64 {
    if x_th.is_infinite() {
        0.0
    } else {
        HBAR * mirror_freq / (K_B * x_th)
    }
}

/// Bose-Einstein occupation `1 / (e^x - 1)`.
pub fn bose_occupation(x: f64) -> Result<f64, ParamsError> {
    if x.is_nan() || x <= 0.0 {
        return Err(ParamsError::Domain("Bose occupation needs x > 0"));
    }
    Ok(1.0 / x.exp_m1())
}

/// `x (n(x) + 1/2) = (x/2) coth(x/2)`, the factor relating `z_QM^2` to
/// `z_CL^2`; exact 1 at `x -> 0`.
fn quantum_factor_minus_one(x: f64) -> f64 {
    if x < 1e-2 {
        let x2 = x * x;
        x2 / 12.0 - x2 * x2 / 720.0 + x2 * x2 * x2 / 30240.0
    } else {
        let y = 0.5 * x;
        y / y.tanh() - 1.0
    }
}

pub(crate) fn quantum_z2(kappa2: f64, x_th: f64) -> f64 {
    if x_th.is_infinite() {
        return kappa2;
    }
    // z_CL^2 (x/2) coth(x/2) == 2 kappa^2 (n(x) + 1/2), written so that
    // z_QM^2 >= z_CL^2 survives rounding
    2.0 * kappa2 / x_th * (1.0 + quantum_factor_minus_one(x_th))
}

/// `z_QM / z_CL - 1`, always non-negative.
pub fn z_ratio_deviation(p: &DerivedParams) -> Result<f64, ParamsError> {
    if p.is_zero_temperature() {
        return Err(ParamsError::Domain("z_QM/z_CL is undefined at T = 0"));
    }
    let d = quantum_factor_minus_one(p.x_th);
    Ok(d / ((1.0 + d).sqrt() + 1.0))
}

/// Truncated high-temperature series `z_CL^2 (1 + x^2/12)` for `z_QM^2`.
pub fn high_temperature_expansion(p: &DerivedParams) -> Result<f64, ParamsError> {
    if !(p.x_th > 0.0 && p.x_th < 1.0) {
        return Err(ParamsError::Domain("high-temperature expansion needs 0 < x_th < 1"));
    }
    Ok(p.z_cl2 * (1.0 + p.x_th * p.x_th / 12.0))
}

/// Short-time decoherence times `(t_CL, t_QM)` in seconds.
pub fn decoherence_times(p: &DerivedParams) -> (f64, f64) {
    (p.t_cl, p.t_qm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn reduced(kappa: f64, t: f64) -> ReducedParams {
        ReducedParams {
            kappa,
            omega_ratio: 10.0,
            mirror_freq: 2.0 * PI * 500.0,
            temperature: Some(t),
            x_th: None,
            mass: None,
        }
    }

    #[test]
    fn thermal_ratio_at_one_microkelvin() {
        let d = reduced(1.0, 1e-6).derive().unwrap();
        assert!((d.x_th / 2.4e-2 - 1.0).abs() < 0.01, "{}", d.x_th);
    }

    #[test]
    fn zero_temperature_limits() {
        let d = reduced(0.7, 0.0).derive().unwrap();
        assert!(d.x_th.is_infinite());
        assert_eq!(d.z_cl2, 0.0);
        assert_eq!(d.z_qm2, d.kappa2);
        assert!(d.t_cl.is_infinite());
        assert!(d.t_qm.is_finite());
        assert!(z_ratio_deviation(&d).is_err());
    }

    #[test]
    fn z_cl2_at_one_millikelvin() {
        // 2 kappa^2 k_B T / (hbar Omega), evaluated by hand from CODATA values
        let omega = 2.0 * PI * 500.0;
        let expected = 2.0 * 1.380649e-23 * 1e-3 / (1.054571817e-34 * omega);
        let d = reduced(1.0, 1e-3).derive().unwrap();
        assert!((d.z_cl2 - expected).abs() / expected < 1e-14);
        assert!((d.z_cl2 - 8.33e4).abs() / 8.33e4 < 1e-3);
        assert!((d.x_th / 2.4e-5 - 1.0).abs() < 0.01);
        assert!((d.t_cl - 1.10e-6).abs() / 1.10e-6 < 0.01, "{}", d.t_cl);
    }

    #[test]
    fn bose_occupation_values() {
        assert!((bose_occupation(2f64.ln()).unwrap() - 1.0).abs() < 1e-15);
        let big = bose_occupation(50.0).unwrap();
        assert!((big / (-50f64).exp() - 1.0).abs() < 1e-12);
        let x: f64 = 2.4e-2;
        let series = 1.0 / x - 0.5 + x / 12.0 - x.powi(3) / 720.0;
        assert!((bose_occupation(x).unwrap() - series).abs() < 1e-10);
        assert!((bose_occupation(x).unwrap() - 41.1687).abs() < 1e-4);
        assert!(bose_occupation(0.0).is_err());
        assert!(bose_occupation(-1.0).is_err());
    }

    #[test]
    fn ratio_deviation_matches_series() {
        for x in [2.4e-2, 2.4e-5] {
            let d = ReducedParams { x_th: Some(x), temperature: None, ..reduced(1.0, 0.0) }.derive().unwrap();
            let dev = z_ratio_deviation(&d).unwrap();
            let series = x * x / 24.0;
            assert!((dev / series - 1.0).abs() < 1e-3, "{x}: {dev} vs {series}");
            assert!(dev < 1e-4);
        }
    }

    #[test]
    fn expansion_domain_and_accuracy() {
        let d = ReducedParams { x_th: Some(0.1), temperature: None, ..reduced(1.0, 0.0) }.derive().unwrap();
        let e = high_temperature_expansion(&d).unwrap();
        assert!(((d.z_qm2 - e) / d.z_cl2).abs() < 0.1f64.powi(4));
        let hot = ReducedParams { x_th: Some(2.4e-2), temperature: None, ..reduced(1.0, 0.0) }.derive().unwrap();
        let e = high_temperature_expansion(&hot).unwrap();
        assert!((e / hot.z_cl2 - (1.0 + 4.8e-5)).abs() < 1e-15);
        let cold = ReducedParams { x_th: Some(1.5), temperature: None, ..reduced(1.0, 0.0) }.derive().unwrap();
        assert!(high_temperature_expansion(&cold).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        let good = PhysicalParams {
            mass: 1e-12,
            mirror_freq: 2.0 * PI * 500.0,
            photon_freq: 3e15,
            cavity_length: 0.05,
            temperature: 1e-4,
        };
        assert!(good.derive().is_ok());
        assert!(PhysicalParams { mass: 0.0, ..good }.derive().is_err());
        assert!(PhysicalParams { cavity_length: f64::NAN, ..good }.derive().is_err());
        assert!(PhysicalParams { photon_freq: f64::INFINITY, ..good }.derive().is_err());
        assert!(PhysicalParams { temperature: -1.0, ..good }.derive().is_err());
        let both = ReducedParams { x_th: Some(0.1), ..reduced(1.0, 1e-3) };
        assert_eq!(both.derive(), Err(ParamsError::TemperatureSpec));
    }

    #[test]
    fn equilibrium_offset_scales_to_kappa_over_root_two() {
        let p = PhysicalParams {
            mass: 2e-12,
            mirror_freq: 2.0 * PI * 500.0,
            photon_freq: 2.0e15,
            cavity_length: 0.03,
            temperature: 1e-4,
        };
        let x_eq = HBAR * p.coupling() / (2.0 * p.mass * p.mirror_freq.powi(2));
        let q_eq = x_eq / p.scales().position;
        let d = p.to_dimensionless().unwrap();
        assert!((q_eq / d.equilibrium_q() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn json_shape() {
        let input: ParamsInput = serde_json::from_str(
            r#"{"dimensionless": {"kappa": 1.0, "omega_ratio": 10.0, "mirror_freq": 3141.59, "temperature": 1e-4}}"#,
        )
        .unwrap();
        let v = serde_json::to_value(input.derive().unwrap()).unwrap();
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        for k in ["g", "kappa2", "omega_shift", "x_th", "z_cl2", "z_qm2", "t_cl", "t_qm"] {
            assert!(keys.iter().any(|x| x == k), "missing {k}");
        }
        assert_eq!(keys.len(), 8);
    }
}
