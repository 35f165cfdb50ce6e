//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Reference values are computed here from the closed-form
//! expressions rather than taken from the library.

use std::f64::consts::{PI, SQRT_2};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use optohybrid::analytic::{rho_ab_pointlike, MirrorPhasePoint};
use optohybrid::decoherence::{
    averaged_rho_monte_carlo, averaged_rho_quadrature, decoherence_time_from_exponent, eta_max_minus_one, eta_ratio,
    visibility,
};
use optohybrid::detection::{detection_probabilities_closed, detection_probabilities_trace};
use optohybrid::dynamics::integrate;
use optohybrid::params::{bose_occupation, ReducedParams};
use optohybrid::{DerivedParams, DimensionlessParams, HybridState, MirrorModel, StepControl, ThermalEnsemble};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const HBAR: f64 = 1.054_571_817e-34;
const K_B: f64 = 1.380_649e-23;
const OMEGA: f64 = 2.0 * PI * 500.0;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn reduced(kappa: f64, t: f64) -> DerivedParams {
    ReducedParams { kappa, omega_ratio: 10.0, mirror_freq: OMEGA, temperature: Some(t), x_th: None, mass: None }
        .derive()
        .expect("valid parameters")
}

fn reduced_x(kappa: f64, x: f64) -> DerivedParams {
    ReducedParams { kappa, omega_ratio: 10.0, mirror_freq: OMEGA, temperature: None, x_th: Some(x), mass: None }
        .derive()
        .expect("valid parameters")
}

fn pointlike_modulus() -> Outcome {
    let p = DimensionlessParams::new(1.0, 10.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let m = MirrorPhasePoint::new(rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0));
        let tau = rng.random_range(0.0..200.0);
        worst = worst.max((rho_ab_pointlike(&m, &p, tau).modulus() - 0.5).abs());
    }
    outcome(worst <= 1e-12, format!("max ||rho_AB| - 1/2| = {worst:.3e} (tol 1e-12)"))
}

/// Closed-form hybrid state `[q, pi, aA, bA, aB, bB]`.
fn reference_state(q0: f64, pi0: f64, kappa: f64, rho: f64, tau: f64) -> [f64; 6] {
    let q_eq = kappa / SQRT_2;
    let amp = (q0 - q_eq).hypot(pi0);
    let phi = (q0 - q_eq).atan2(pi0);
    let big_theta = (rho - kappa * kappa) * tau + SQRT_2 * kappa * amp * ((tau + phi).cos() - phi.cos());
    [
        amp * (tau + phi).sin() + q_eq,
        amp * (tau + phi).cos(),
        big_theta.cos(),
        -big_theta.sin(),
        (rho * tau).cos(),
        -(rho * tau).sin(),
    ]
}

fn numeric_vs_analytic() -> Outcome {
    let starts = [(0.3, -0.7), (-1.2, 0.4), (2.0, 1.5)];
    let (mut dev, mut drift) = (0.0_f64, 0.0_f64);
    for rho in [1.0, 10.0, 1e3] {
        let p = DimensionlessParams::new(1.0, rho, 1.0).unwrap();
        for &(q0, pi0) in &starts {
            let traj = integrate(&HybridState::prepared(q0, pi0), &p, 4.0 * PI, 41, StepControl::Fixed { step: 2e-3 / rho })
                .expect("integration succeeds");
            for (&tau, s) in traj.tau_grid.iter().zip(&traj.states) {
                let r = reference_state(q0, pi0, 1.0, rho, tau);
                let got = s.as_array();
                dev = (0..6).map(|i| (got[i] - r[i]).abs()).fold(dev, f64::max);
            }
            drift = drift.max(traj.max_n_drift());
        }
    }
    outcome(
        dev <= 1e-8 && drift <= 1e-9,
        format!("max component deviation {dev:.3e} (tol 1e-8), max nA/nB drift {drift:.3e} (tol 1e-9)"),
    )
}

fn thermal_reference(kappa2: f64, x: f64, tau: f64) -> (f64, f64) {
    let modulus = 0.5 * (-(2.0 * kappa2 / x) * (1.0 - tau.cos())).exp();
    let phase = kappa2 * (tau - tau.sin());
    (modulus * phase.cos(), modulus * phase.sin())
}

fn thermal_three_way() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for x in [0.5, 2.4e-2] {
        let p = DimensionlessParams::new(1.0, 10.0, x).unwrap();
        let e = ThermalEnsemble::new(x).unwrap();
        let (mut quad_dev, mut sigmas) = (0.0_f64, 0.0_f64);
        for k in 0..20 {
            let tau = 4.0 * PI * (k as f64 + 0.5) / 20.0;
            let (re, im) = thermal_reference(1.0, x, tau);
            let quad = averaged_rho_quadrature(&e, &p, tau, 40).unwrap();
            quad_dev = quad_dev.max((quad.re - re).abs()).max((quad.im - im).abs());
            let mc = averaged_rho_monte_carlo(&e, &p, tau, 100_000, 20_240_611).unwrap();
            sigmas = sigmas.max((mc.re - re).abs() / mc.stderr_re).max((mc.im - im).abs() / mc.stderr_im);
        }
        ok &= quad_dev <= 1e-10 && sigmas <= 4.0;
        parts.push(format!("xTh={x}: |closed-quad40| {quad_dev:.3e} (tol 1e-10), MC max {sigmas:.2} sigma (tol 4)"));
    }
    outcome(ok, parts.join("; "))
}

fn revival() -> Outcome {
    let (mut revival_dev, mut collapse) = (0.0_f64, 0.0_f64);
    for t in [1e-3, 1e-4] {
        let d = reduced(1.0, t);
        for model in [MirrorModel::ClassicalThermal, MirrorModel::QuantumThermal] {
            for tau in [0.0, 2.0 * PI, 4.0 * PI] {
                revival_dev = revival_dev.max((visibility(&model, &d, tau) - 0.5).abs());
            }
            collapse = collapse.max(visibility(&model, &d, PI));
        }
    }
    outcome(
        revival_dev <= 1e-12 && collapse <= 1e-100,
        format!("revival deviation {revival_dev:.3e} (tol 1e-12), visibility at pi {collapse:.3e} (tol 1e-100)"),
    )
}

fn parameter_claims() -> Outcome {
    let temps: Vec<f64> = (0..=30).map(|i| 10f64.powf(-6.0 + 3.0 * i as f64 / 30.0)).collect();
    let xs: Vec<f64> = temps.iter().map(|&t| reduced(1.0, t).x_th).collect();
    let (x_lo, x_hi) = (xs[30], xs[0]);
    let span_ok = (x_lo / 2.4e-5 - 1.0).abs() <= 0.01 && (x_hi / 2.4e-2 - 1.0).abs() <= 0.01;
    let (mut max_ratio_dev, mut eta_lo, mut eta_hi) = (0.0_f64, f64::INFINITY, 0.0_f64);
    for &t in &temps {
        let d = reduced(1.0, t);
        max_ratio_dev = max_ratio_dev.max(d.z_qm() / d.z_cl() - 1.0);
        // max over a fine tau grid of one mirror period
        let scan = (0..=2000).map(|i| eta_ratio(&d, 2.0 * PI * i as f64 / 2000.0).unwrap() - 1.0).fold(0.0, f64::max);
        eta_lo = eta_lo.min(scan);
        eta_hi = eta_hi.max(scan);
    }
    let cold = reduced(1.0, 1e-6);
    let x = HBAR * OMEGA / (K_B * 1e-6);
    // 2 (z_QM^2 - z_CL^2) to leading order: 2 (2 kappa^2 / x)(x^2 / 12)
    let series = x / 3.0;
    let eta_cold = eta_max_minus_one(&cold).unwrap();
    let factor = eta_cold / series;
    let ok = span_ok
        && max_ratio_dev < 1e-4
        && eta_lo > 0.0
        && eta_hi < 1e-2
        && (0.5..=2.0).contains(&factor);
    outcome(
        ok,
        format!(
            "xTh in [{x_lo:.4e}, {x_hi:.4e}], max z_QM/z_CL-1 {max_ratio_dev:.3e}, eta-1 in [{eta_lo:.3e}, {eta_hi:.3e}], \
             eta-1 at 1e-6 K {eta_cold:.3e} vs series {series:.3e}"
        ),
    )
}

fn high_temperature() -> Outcome {
    let mut worst = 0.0_f64;
    let mut ok = true;
    for x in [0.01, 0.05, 0.1] {
        let d = reduced_x(1.0, x);
        let rel = (d.z_qm2 - d.z_cl2 * (1.0 + x * x / 12.0)).abs() / d.z_cl2;
        ok &= rel <= x.powi(4);
        worst = worst.max(rel / x.powi(4));
    }
    outcome(ok, format!("max |residual| / xTh^4 = {worst:.3e} (tol 1)"))
}

fn decoherence_times() -> Outcome {
    let mut root_dev = 0.0_f64;
    for z in [10.0, 30.0, 100.0, 1e3] {
        let t = decoherence_time_from_exponent(z * z, OMEGA).unwrap();
        root_dev = root_dev.max((t * z * OMEGA - 1.0).abs());
    }
    let mut ratio_dev = 0.0_f64;
    for t in [1e-6, 1e-5, 1e-4, 1e-3] {
        let d = reduced(1.0, t);
        let expected = (d.x_th * (bose_occupation(d.x_th).unwrap() + 0.5)).sqrt();
        ratio_dev = ratio_dev.max((d.t_cl / d.t_qm / expected - 1.0).abs());
    }
    outcome(
        root_dev <= 0.01 && ratio_dev <= 1e-10,
        format!("root vs 1/(z Omega) {root_dev:.3e} (tol 1e-2), t_CL/t_QM vs bose factor {ratio_dev:.3e} (tol 1e-10)"),
    )
}

fn detection() -> Outcome {
    let models = [
        MirrorModel::ClassicalPointlike(MirrorPhasePoint::default()),
        MirrorModel::ClassicalThermal,
        MirrorModel::QuantumThermal,
    ];
    let (mut inexact, mut route_dev, mut start_dev, mut revival_dev) = (0usize, 0.0_f64, 0.0_f64, 0.0_f64);
    for t in [1e-3, 1e-4] {
        let d = reduced(1.0, t);
        for model in &models {
            for i in 0..1000 {
                let tau = 4.0 * PI * i as f64 / 999.0;
                let a = detection_probabilities_trace(model, &d, tau);
                let b = detection_probabilities_closed(model, &d, tau);
                inexact += usize::from(a.p1 + a.p2 != 1.0) + usize::from(b.p1 + b.p2 != 1.0);
                route_dev = route_dev.max((a.p1 - b.p1).abs());
            }
            start_dev = start_dev.max((detection_probabilities_trace(model, &d, 0.0).p1 - 1.0).abs());
            revival_dev = revival_dev.max((detection_probabilities_trace(model, &d, 2.0 * PI).p1 - 1.0).abs());
        }
    }
    outcome(
        inexact == 0 && route_dev <= 1e-12 && start_dev == 0.0 && revival_dev <= 1e-12,
        format!(
            "inexact sums {inexact}, trace vs closed {route_dev:.3e} (tol 1e-12), |P1(0)-1| {start_dev:.1e}, \
             |P1(2pi)-1| {revival_dev:.3e} (tol 1e-12)"
        ),
    )
}

fn run_cli(scenario: &str, out: &Path, workers: usize) {
    let status = Command::new(env!("CARGO_BIN_EXE_optohybrid"))
        .args([scenario, "--seed", "7", "--workers", &workers.to_string(), "--out"])
        .arg(out)
        .stdout(std::process::Stdio::null())
        .status()
        .expect("binary runs");
    assert!(status.code().is_some(), "{scenario} terminated by signal");
}

fn dir_contents(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn reproducibility() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let mut mismatches = Vec::new();
    for scenario in ["validate", "mc-convergence"] {
        let runs: Vec<_> = [(1, "a"), (1, "b"), (4, "c"), (4, "d")]
            .iter()
            .map(|&(w, tag)| {
                let dir = tmp.path().join(format!("{scenario}-{tag}"));
                run_cli(scenario, &dir, w);
                dir_contents(&dir)
            })
            .collect();
        if runs[0].is_empty() || runs.iter().any(|r| r != &runs[0]) {
            mismatches.push(scenario);
        }
    }
    outcome(
        mismatches.is_empty(),
        if mismatches.is_empty() {
            "validate and mc-convergence byte-identical over 2 runs x workers {1, 4}".into()
        } else {
            format!("outputs differ for {mismatches:?}")
        },
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("pointlike coherence modulus", pointlike_modulus),
        ("numeric vs analytic dynamics", numeric_vs_analytic),
        ("thermal average three-way", thermal_three_way),
        ("visibility revival and collapse", revival),
        ("parameter-regime claims", parameter_claims),
        ("high-temperature expansion", high_temperature),
        ("decoherence-time relation", decoherence_times),
        ("detection probabilities", detection),
        ("reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("criterion {}: {tag} {name} [{:.2}s] {}", i + 1, start.elapsed().as_secs_f64(), o.detail);
        failed += usize::from(!o.passed);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
