//! Thermal averaging of the coherence over Boltzmann-distributed mirror
//! initial conditions, visibility, and classical/quantum comparison.
//!
//! The ensemble average is computed three ways that share nothing but the
//! pointlike integrand: the Gaussian closed form, a tensor-product
//! Gauss-Hermite rule, and a counter-based Monte Carlo estimator whose result
//! does not depend on the number of worker threads.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::{rho_ab_pointlike, MirrorPhasePoint};
use crate::hermite::GaussHermite;
use crate::params::{quantum_z2, DerivedParams, DimensionlessParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecoherenceError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Domain(&'static str),
}

/// Boltzmann ensemble in scaled phase space: isotropic Gaussian with
/// variance `1 / x_th` per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalEnsemble {
    pub x_th: f64,
}

impl ThermalEnsemble {
    /// `x_th = +inf` is the zero-temperature ensemble (all mass at the origin).
    pub fn new(x_th: f64) -> Result<Self, DecoherenceError> {
        if x_th.is_nan() || x_th <= 0.0 {
            return Err(DecoherenceError::Config(format!("x_th must be positive, got {x_th}")));
        }
        Ok(ThermalEnsemble { x_th })
    }

    pub fn std_dev(&self) -> f64 {
        if self.x_th.is_infinite() {
            0.0
        } else {
            self.x_th.sqrt().recip()
        }
    }
}

impl From<&DimensionlessParams> for ThermalEnsemble {
    fn from(p: &DimensionlessParams) -> Self {
        ThermalEnsemble { x_th: p.x_th }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    MonteCarlo,
    Quadrature,
}

/// Ensemble-averaged `rho_AB`. `samples` is the Monte Carlo sample count or
/// the per-axis quadrature order (zero for the closed form).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AveragedCoherence {
    pub re: f64,
    pub im: f64,
    pub stderr_re: f64,
    pub stderr_im: f64,
    pub method: Method,
    pub samples: usize,
}

impl AveragedCoherence {
    fn exact(c: Complex64, method: Method, samples: usize) -> Self {
        AveragedCoherence { re: c.re, im: c.im, stderr_re: 0.0, stderr_im: 0.0, method, samples }
    }

    pub fn modulus(&self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// How the mirror is modelled. Thermal models take their temperature from
/// the accompanying parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MirrorModel {
    ClassicalPointlike(MirrorPhasePoint),
    ClassicalThermal,
    QuantumThermal,
}

impl MirrorModel {
    pub fn name(&self) -> &'static str {
        match self {
            MirrorModel::ClassicalPointlike(_) => "pointlike",
            MirrorModel::ClassicalThermal => "classical",
            MirrorModel::QuantumThermal => "quantum",
        }
    }

    /// Decoherence strength `z^2` for this model; zero for a pointlike mirror.
    pub fn z2(&self, kappa2: f64, x_th: f64) -> f64 {
        match self {
            MirrorModel::ClassicalPointlike(_) => 0.0,
            MirrorModel::ClassicalThermal => 2.0 * kappa2 / x_th,
            MirrorModel::QuantumThermal => quantum_z2(kappa2, x_th),
        }
    }
}

/// `theta(tau) = tau - sin(tau)`.
pub fn theta(tau: f64) -> f64 {
    tau - tau.sin()
}

/// `1 - cos(tau)` without cancellation near multiples of `2 pi`.
pub fn one_minus_cos(tau: f64) -> f64 {
    let s = (0.5 * tau).sin();
    2.0 * s * s
}

/// Scaled Boltzmann density `(x/2pi) exp(-x (q^2 + pi^2) / 2)`.
pub fn boltzmann_density(m: &MirrorPhasePoint, e: &ThermalEnsemble) -> f64 {
    e.x_th / (2.0 * std::f64::consts::PI) * (-0.5 * e.x_th * (m.q0 * m.q0 + m.pi0 * m.pi0)).exp()
}

fn closed_complex(kappa2: f64, z2: f64, tau: f64) -> Complex64 {
    let decay = if z2 == 0.0 { 0.0 } else { -z2 * one_minus_cos(tau) };
    Complex64::from_polar(0.5 * decay.exp(), kappa2 * theta(tau))
}

/// Closed-form Gaussian average `(1/2) exp(i kappa^2 theta) exp(-z^2 (1 - cos tau))`.
///
/// A pointlike model returns its (exact) unaveraged coherence.
pub fn averaged_rho_closed(
    e: &ThermalEnsemble,
    p: &DimensionlessParams,
    tau: f64,
    model: &MirrorModel,
) -> AveragedCoherence {
    let c = match model {
        MirrorModel::ClassicalPointlike(m) => rho_ab_pointlike(m, p, tau).as_complex(),
        thermal => closed_complex(p.kappa2(), thermal.z2(p.kappa2(), e.x_th), tau),
    };
    AveragedCoherence::exact(c, Method::ClosedForm, 0)
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub samples: usize,
    pub seed: u64,
    /// Worker threads; `None` uses the global pool. Never changes the result.
    pub workers: Option<usize>,
}

const BLOCK_LEN: usize = 4096;

/// Sample `i` of block `b` is the `i`-th draw pair from the ChaCha stream
/// `(seed, b)`, so every sample is addressable without shared state.
fn block_points(seed: u64, block: usize, len: usize, sigma: f64) -> impl Iterator<Item = MirrorPhasePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block as u64);
    (0..len).map(move |_| {
        let q0: f64 = StandardNormal.sample(&mut rng);
        let pi0: f64 = StandardNormal.sample(&mut rng);
        MirrorPhasePoint::new(sigma * q0, sigma * pi0)
    })
}

fn ordered_block_sums<F>(n: usize, f: F) -> (f64, f64)
where
    F: Fn(usize, usize) -> (f64, f64) + Sync,
{
    let blocks = n.div_ceil(BLOCK_LEN);
    let partial: Vec<(f64, f64)> = (0..blocks)
        .into_par_iter()
        .map(|b| f(b, BLOCK_LEN.min(n - b * BLOCK_LEN)))
        .collect();
    let (mut re, mut im) = (CompensatedSum::default(), CompensatedSum::default());
    for (r, i) in partial {
        re.add(r);
        im.add(i);
    }
    (re.value(), im.value())
}

fn monte_carlo_inner(e: &ThermalEnsemble, p: &DimensionlessParams, tau: f64, n: usize, seed: u64) -> AveragedCoherence {
    let sigma = e.std_dev();
    let nf = n as f64;
    let (sum_re, sum_im) = ordered_block_sums(n, |b, len| {
        let (mut re, mut im) = (CompensatedSum::default(), CompensatedSum::default());
        for m in block_points(seed, b, len, sigma) {
            let c = rho_ab_pointlike(&m, p, tau);
            re.add(c.re);
            im.add(c.im);
        }
        (re.value(), im.value())
    });
    let (mean_re, mean_im) = (sum_re / nf, sum_im / nf);
    // second pass over the same streams for the centred variance
    let (ss_re, ss_im) = ordered_block_sums(n, |b, len| {
        let (mut re, mut im) = (CompensatedSum::default(), CompensatedSum::default());
        for m in block_points(seed, b, len, sigma) {
            let c = rho_ab_pointlike(&m, p, tau);
            re.add((c.re - mean_re).powi(2));
            im.add((c.im - mean_im).powi(2));
        }
        (re.value(), im.value())
    });
    let stderr = |ss: f64| (ss / (nf - 1.0) / nf).sqrt();
    AveragedCoherence {
        re: mean_re,
        im: mean_im,
        stderr_re: stderr(ss_re),
        stderr_im: stderr(ss_im),
        method: Method::MonteCarlo,
        samples: n,
    }
}

/// Monte Carlo estimate of the thermal average with componentwise standard
/// errors (sample standard deviation over `sqrt(n)`).
pub fn averaged_rho_monte_carlo(
    e: &ThermalEnsemble,
    p: &DimensionlessParams,
    tau: f64,
    n: usize,
    seed: u64,
) -> Result<AveragedCoherence, DecoherenceError> {
    averaged_rho_monte_carlo_with(e, p, tau, &MonteCarloConfig { samples: n, seed, workers: None })
}

pub fn averaged_rho_monte_carlo_with(
    e: &ThermalEnsemble,
    p: &DimensionlessParams,
    tau: f64,
    cfg: &MonteCarloConfig,
) -> Result<AveragedCoherence, DecoherenceError> {
    if cfg.samples < 2 {
        return Err(DecoherenceError::Config(format!("need at least 2 samples, got {}", cfg.samples)));
    }
    match cfg.workers {
        None => Ok(monte_carlo_inner(e, p, tau, cfg.samples, cfg.seed)),
        Some(0) => Err(DecoherenceError::Config("worker count must be positive".into())),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|err| DecoherenceError::Config(err.to_string()))?;
            Ok(pool.install(|| monte_carlo_inner(e, p, tau, cfg.samples, cfg.seed)))
        }
    }
}

/// Tensor-product Gauss-Hermite average with `order` nodes per axis, scaled
/// to the ensemble standard deviation.
pub fn averaged_rho_quadrature(
    e: &ThermalEnsemble,
    p: &DimensionlessParams,
    tau: f64,
    order: usize,
) -> Result<AveragedCoherence, DecoherenceError> {
    if order < 2 {
        return Err(DecoherenceError::Config(format!("quadrature order must be >= 2, got {order}")));
    }
    let rule = GaussHermite::new(order);
    let sigma = e.std_dev();
    let (mut re, mut im) = (CompensatedSum::default(), CompensatedSum::default());
    for (&x, &wx) in rule.nodes.iter().zip(&rule.weights) {
        for (&y, &wy) in rule.nodes.iter().zip(&rule.weights) {
            let c = rho_ab_pointlike(&MirrorPhasePoint::new(sigma * x, sigma * y), p, tau);
            re.add(wx * wy * c.re);
            im.add(wx * wy * c.im);
        }
    }
    Ok(AveragedCoherence::exact(Complex64::new(re.value(), im.value()), Method::Quadrature, order))
}

/// Interference visibility `|<rho_AB>|`.
pub fn visibility(model: &MirrorModel, p: &DerivedParams, tau: f64) -> f64 {
    match model {
        MirrorModel::ClassicalPointlike(_) => 0.5,
        MirrorModel::ClassicalThermal => 0.5 * (-p.z_cl2 * one_minus_cos(tau)).exp(),
        MirrorModel::QuantumThermal => 0.5 * (-p.z_qm2 * one_minus_cos(tau)).exp(),
    }
}

/// Classical over quantum visibility, `exp((z_QM^2 - z_CL^2)(1 - cos tau))`.
pub fn eta_ratio(p: &DerivedParams, tau: f64) -> Result<f64, DecoherenceError> {
    if p.is_zero_temperature() {
        return Err(DecoherenceError::Domain("eta is undefined at T = 0"));
    }
    Ok(((p.z_qm2 - p.z_cl2) * one_minus_cos(tau)).exp())
}

/// Largest `eta - 1` over a mirror period (reached at `tau = pi`).
pub fn eta_max_minus_one(p: &DerivedParams) -> Result<f64, DecoherenceError> {
    if p.is_zero_temperature() {
        return Err(DecoherenceError::Domain("eta is undefined at T = 0"));
    }
    Ok((2.0 * (p.z_qm2 - p.z_cl2)).exp_m1())
}

/// Time (s) at which `z^2 (1 - cos(Omega t))` first reaches 1/2, found by
/// bisection on `(0, pi]`. `None` when the exponent never gets there.
pub fn decoherence_time_from_exponent(z2: f64, mirror_freq: f64) -> Option<f64> {
    let f = |tau: f64| z2 * one_minus_cos(tau) - 0.5;
    if !(f(std::f64::consts::PI) > 0.0) {
        return None;
    }
    let (mut lo, mut hi) = (0.0_f64, std::f64::consts::PI);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(0.5 * (lo + hi) / mirror_freq)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShortTimeReport {
    pub tau_max: f64,
    /// Max over the grid of `|exact - gaussian| / gaussian` for the exponent.
    pub max_rel_deviation: f64,
    pub bound: f64,
    pub t_cl: f64,
    /// Root-found decoherence time from the exact exponent, if any.
    pub t_root: Option<f64>,
    pub passed: bool,
}

/// Compares the exact classical exponent with its Gaussian short-time form
/// `(tau / (Omega t_CL))^2 / 2` on `(0, tau_max]`.
pub fn gaussian_short_time_check(p: &DerivedParams, tau_max: f64) -> Result<ShortTimeReport, DecoherenceError> {
    if !(tau_max > 0.0 && tau_max <= 0.1) {
        return Err(DecoherenceError::Domain("short-time check needs 0 < tau_max <= 0.1"));
    }
    if p.is_zero_temperature() {
        return Err(DecoherenceError::Domain("no classical decoherence time at T = 0"));
    }
    const POINTS: usize = 1000;
    let scale = p.mirror_freq * p.t_cl;
    let mut worst = 0.0_f64;
    for i in 1..=POINTS {
        let tau = tau_max * i as f64 / POINTS as f64;
        let exact = p.z_cl2 * one_minus_cos(tau);
        let gaussian = 0.5 * (tau / scale).powi(2);
        worst = worst.max((exact - gaussian).abs() / gaussian);
    }
    let bound = tau_max * tau_max / 10.0;
    Ok(ShortTimeReport {
        tau_max,
        max_rel_deviation: worst,
        bound,
        t_cl: p.t_cl,
        t_root: decoherence_time_from_exponent(p.z_cl2, p.mirror_freq),
        passed: worst <= bound,
    })
}
