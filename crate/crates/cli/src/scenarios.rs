//! One function per scenario. Each writes its files through the [`Emitter`]
//! and returns its checks; floats are written with `{:?}`, the shortest
//! representation that round-trips.

use std::f64::consts::PI;
use std::fmt::Write;

use optohybrid::analytic::closed_form_state;
use optohybrid::decoherence::{
    averaged_rho_closed, averaged_rho_monte_carlo_with, averaged_rho_quadrature, decoherence_time_from_exponent,
    eta_max_minus_one, eta_ratio, gaussian_short_time_check, theta, visibility,
};
use optohybrid::detection::{detection_probabilities_closed, detection_probabilities_trace};
use optohybrid::dynamics::integrate;
use optohybrid::params::{high_temperature_expansion, z_ratio_deviation};
use optohybrid::{
    AveragedCoherence, DerivedParams, DimensionlessParams, HybridState, MirrorModel, MonteCarloConfig,
    ReducedParams, StepControl, ThermalEnsemble,
};
use serde::Serialize;

use crate::svg::{Plot, Series};
use crate::{Check, CliError, Emitter, RunConfig};

/// Ceiling on `omega_ratio` for trajectory output; beyond it the fixed step
/// needed to resolve the arm phase makes the run impractically long.
pub const MAX_TRAJECTORY_OMEGA_RATIO: f64 = 1e4;

fn tau_grid(cfg: &RunConfig) -> Vec<f64> {
    (0..cfg.points).map(|i| cfg.tau_max * i as f64 / (cfg.points - 1) as f64).collect()
}

/// Derived parameters for every configured temperature.
fn sweep_params(cfg: &RunConfig) -> Result<Vec<DerivedParams>, CliError> {
    cfg.temperature_list()
        .into_iter()
        .map(|t| Ok(t.map_or(cfg.params, |t| cfg.params_at(t)).derive()?))
        .collect()
}

fn temperature_label(t: f64) -> String {
    format!("T{t:e}")
}

fn json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("values serialize");
    s.push('\n');
    s
}

fn thermal_models() -> [MirrorModel; 2] {
    [MirrorModel::ClassicalThermal, MirrorModel::QuantumThermal]
}

pub fn derive(cfg: &RunConfig, em: &mut Emitter) -> Result<Vec<Check>, CliError> {
    let d = cfg.params.derive()?;
    em.write("derived.json", &json(&d))?;
    let mut checks = vec![Check::at_least("kappa2_positive", d.kappa2, f64::MIN_POSITIVE)];
    if !d.is_zero_temperature() {
        checks.push(Check::at_least("z_qm2_minus_z_cl2", d.z_qm2 - d.z_cl2, 0.0));
        checks.push(Check::at_least("t_cl_minus_t_qm", d.t_cl - d.t_qm, 0.0));
    }
    Ok(checks)
}

pub fn trajectory(cfg: &RunConfig, em: &mut Emitter) -> Result<Vec<Check>, CliError> {
    let p = cfg.params.derive()?.dimensionless();
    if p.omega_ratio > MAX_TRAJECTORY_OMEGA_RATIO {
        return Err(CliError::Usage(format!(
            "trajectory: omega_ratio {} exceeds {MAX_TRAJECTORY_OMEGA_RATIO:e}; use the closed-form scenarios",
            p.omega_ratio
        )));
    }
    let m = cfg.initial_mirror;
    let step = cfg.step.unwrap_or(2e-3 / p.omega_ratio);
    let traj = integrate(&HybridState::prepared(m.q0, m.pi0), &p, cfg.tau_max, cfg.points, StepControl::Fixed { step })?;
    em.write("trajectory.csv", &traj.to_csv())?;
    let closed_dev = traj
        .tau_grid
        .iter()
        .zip(&traj.states)
        .map(|(&tau, s)| s.max_abs_diff(&closed_form_state(&m, &p, tau)))
        .fold(0.0, f64::max);
    if cfg.svg {
        let col = |f: fn(&HybridState) -> f64| traj.tau_grid.iter().zip(&traj.states).map(|(&t, s)| (t, f(s))).collect();
        let plot = Plot {
            title: format!("mirror and arm A, kappa = {}, omega_ratio = {}", p.kappa, p.omega_ratio),
            x_label: "tau".into(),
            y_label: "scaled amplitude".into(),
            series: vec![
                Series { label: "q".into(), points: col(|s| s.q) },
                Series { label: "pi".into(), points: col(|s| s.pi) },
                Series { label: "aA".into(), points: col(|s| s.a_a) },
                Series { label: "bA".into(), points: col(|s| s.b_a) },
            ],
        };
        em.write("trajectory.svg", &plot.render())?;
    }
    Ok(vec![
        Check::at_most("max_closed_form_deviation", closed_dev, 1e-8),
        Check::at_most("max_n_drift", traj.max_n_drift(), 1e-9),
    ])
}

#[derive(Serialize)]
struct VisibilitySummary {
    temperature: f64,
    x_th: f64,
    t_cl: f64,
    t_qm: f64,
    z_cl: f64,
    z_qm: f64,
    eta_max: Option<f64>,
    eta_max_minus_one: Option<f64>,
}

/// Worst `|vis - 1/2|` over the thermal models at the revivals `2 pi n` in range.
fn revival_deviation(d: &DerivedParams, tau_max: f64) -> Option<f64> {
    let revivals: Vec<f64> = (1..).map(|n| 2.0 * PI * n as f64).take_while(|&t| t <= tau_max).collect();
    if revivals.is_empty() {
        return None;
    }
    Some(
        revivals
            .iter()
            .flat_map(|&t| thermal_models().map(|m| (visibility(&m, d, t) - 0.5).abs()))
            .fold(0.0, f64::max),
    )
}

pub fn visibility_scenario(cfg: &RunConfig, em: &mut Emitter) -> Result<Vec<Check>, CliError> {
    let grid = tau_grid(cfg);
    let pointlike = MirrorModel::ClassicalPointlike(cfg.initial_mirror);
    let mut checks = Vec::new();
    let mut summary = Vec::new();
    let mut series = Vec::new();
    for d in sweep_params(cfg)? {
        let label = temperature_label(d.temperature);
        let mut csv = String::from("tau,vis_pointlike,vis_classical,vis_quantum,eta,phase_kappa2_theta\n");
        let (mut worst_order, mut min_eta) = (f64::NEG_INFINITY, f64::INFINITY);
        let (mut cl, mut qm) = (Vec::new(), Vec::new());
        for &tau in &grid {
            let vp = visibility(&pointlike, &d, tau);
            let vc = visibility(&MirrorModel::ClassicalThermal, &d, tau);
            let vq = visibility(&MirrorModel::QuantumThermal, &d, tau);
            let eta = eta_ratio(&d, tau).unwrap_or(f64::NAN);
            let _ = writeln!(csv, "{tau:?},{vp:?},{vc:?},{vq:?},{eta:?},{:?}", d.kappa2 * theta(tau));
            worst_order = worst_order.max(vq - vc);
            min_eta = min_eta.min(eta);
            cl.push((tau, vc));
            qm.push((tau, vq));
        }
        em.write(&format!("visibility_{label}.csv"), &csv)?;
        checks.push(Check::at_most(format!("{label}/vis_quantum_minus_classical"), worst_order, 0.0));
        if let Some(dev) = revival_deviation(&d, cfg.tau_max) {
            checks.push(Check::at_most(format!("{label}/revival_deviation"), dev, 1e-12));
        }
        if !d.is_zero_temperature() {
            checks.push(Check::at_least(format!("{label}/min_eta"), min_eta, 1.0));
        }
        let eta_m1 = eta_max_minus_one(&d).ok();
        summary.push(VisibilitySummary {
            temperature: d.temperature,
            x_th: d.x_th,
            t_cl: d.t_cl,
            t_qm: d.t_qm,
            z_cl: d.z_cl(),
            z_qm: d.z_qm(),
            eta_max: eta_m1.map(|e| 1.0 + e),
            eta_max_minus_one: eta_m1,
        });
        series.push(Series { label: format!("classical {}", d.temperature), points: cl });
        series.push(Series { label: format!("quantum {}", d.temperature), points: qm });
    }
    em.write("visibility_summary.json", &json(&summary))?;
    if cfg.svg {
        let plot = Plot {
            title: "interference visibility".into(),
            x_label: "tau".into(),
            y_label: "|<rho_AB>|".into(),
            series,
        };
        em.write("visibility.svg", &plot.render())?;
    }
    Ok(checks)
}

pub fn detect(cfg: &RunConfig, em: &mut Emitter) -> Result<Vec<Check>, CliError> {
    let grid = tau_grid(cfg);
    let models = [
        MirrorModel::ClassicalPointlike(cfg.initial_mirror),
        MirrorModel::ClassicalThermal,
        MirrorModel::QuantumThermal,
    ];
    let mut checks = Vec::new();
    let mut series = Vec::new();
    for (k, d) in sweep_params(cfg)?.into_iter().enumerate() {
        let label = temperature_label(d.temperature);
        let mut csv = String::from("tau,p1,p2,model\n");
        let (mut bad_sums, mut route_dev) = (0usize, 0.0_f64);
        for model in &models {
            let mut pts = Vec::new();
            for &tau in &grid {
                let r = detection_probabilities_trace(model, &d, tau);
                let c = detection_probabilities_closed(model, &d, tau);
                let _ = writeln!(csv, "{tau:?},{:?},{:?},{}", r.p1, r.p2, model.name());
                bad_sums += usize::from(r.p1 + r.p2 != 1.0);
                route_dev = route_dev.max((r.p1 - c.p1).abs());
                pts.push((tau, r.p1));
            }
            // one pointlike curve is enough; it does not depend on temperature
            if k == 0 || !matches!(model, MirrorModel::ClassicalPointlike(_)) {
                series.push(Series { label: format!("P1 {} {}", model.name(), d.temperature), points: pts });
            }
        }
        em.write(&format!("detect_{label}.csv"), &csv)?;
        checks.push(Check::at_most(format!("{label}/inexact_probability_sums"), bad_sums as f64, 0.0));
        checks.push(Check::at_most(format!("{label}/trace_vs_closed_form"), route_dev, 1e-12));
        let start = thermal_models()
            .map(|m| (detection_probabilities_trace(&m, &d, 0.0).p1 - 1.0).abs())
            .into_iter()
            .fold(0.0, f64::max);
        checks.push(Check::at_most(format!("{label}/p1_at_start_deviation"), start, 0.0));
    }
    if cfg.svg {
        let plot = Plot {
            title: "detector 1 click probability".into(),
            x_label: "tau".into(),
            y_label: "P1".into(),
            series,
        };
        em.write("detect.svg", &plot.render())?;
    }
    Ok(checks)
}

pub fn eta_sweep(cfg: &RunConfig, em: &mut Emitter) -> Result<Vec<Check>, CliError> {
    let mut csv = String::from("temperature,x_th,z_cl2,z_qm2,z_ratio_deviation,eta_max_minus_one,t_cl,t_qm\n");
    let (mut max_dev, mut max_eta, mut min_eta) = (0.0_f64, 0.0_f64, f64::INFINITY);
    let mut pts = Vec::new();
    for t in cfg.eta_sweep.temperatures() {
        let d = cfg.params_at(t).derive()?;
        let dev = z_ratio_deviation(&d)?;
        let eta = eta_max_minus_one(&d)?;
        let _ = writeln!(
            csv,
            "{t:?},{:?},{:?},{:?},{dev:?},{eta:?},{:?},{:?}",
            d.x_th, d.z_cl2, d.z_qm2, d.t_cl, d.t_qm
        );
        max_dev = max_dev.max(dev);
        max_eta = max_eta.max(eta);
        min_eta = min_eta.min(eta);
        pts.push((t.log10(), eta.log10()));
    }
    em.write("eta_sweep.csv", &csv)?;
    if cfg.svg {
        let plot = Plot {
            title: "largest classical/quantum visibility ratio".into(),
            x_label: "log10 T [K]".into(),
            y_label: "log10(eta_max - 1)".into(),
            series: vec![Series { label: "eta_max - 1".into(), points: pts }],
        };
        em.write("eta_sweep.svg", &plot.render())?;
    }
    Ok(vec![
        Check::at_most("max_z_ratio_deviation", max_dev, 1e-4),
        Check::at_most("max_eta_minus_one", max_eta, 1e-2),
        Check::at_least("min_eta_minus_one", min_eta, f64::MIN_POSITIVE),
    ])
}

/// Scaled times `4 pi (k + 1/2) / 20`, off the revivals where every method
/// agrees trivially.
pub fn comparison_taus() -> Vec<f64> {
    (0..20).map(|k| 4.0 * PI * (k as f64 + 0.5) / 20.0).collect()
}

/// Largest `|mc - exact| / stderr` over both components; an exact match with
/// zero error counts as zero.
pub fn mc_sigma_deviation(mc: &AveragedCoherence, exact: &AveragedCoherence) -> f64 {
    let z = |d: f64, s: f64| if d == 0.0 { 0.0 } else { d.abs() / s };
    z(mc.re - exact.re, mc.stderr_re).max(z(mc.im - exact.im, mc.stderr_im))
}

pub fn validate(cfg: &RunConfig, em: &mut Emitter) -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();

    let m = cfg.initial_mirror;
    for rho in [1.0, 10.0, 1e3] {
        let p = DimensionlessParams::new(1.0, rho, 1.0)?;
        let traj = integrate(&HybridState::prepared(m.q0, m.pi0), &p, 4.0 * PI, 9, StepControl::Fixed { step: 2e-3 / rho })?;
        let dev = traj
            .tau_grid
            .iter()
            .zip(&traj.states)
            .map(|(&tau, s)| s.max_abs_diff(&closed_form_state(&m, &p, tau)))
            .fold(0.0, f64::max);
        checks.push(Check::at_most(format!("dynamics/closed_form_deviation_rho{rho:e}"), dev, 1e-8));
        checks.push(Check::at_most(format!("dynamics/n_drift_rho{rho:e}"), traj.max_n_drift(), 1e-9));
    }

    let mc_cfg = MonteCarloConfig { samples: cfg.samples, seed: cfg.seed, workers: cfg.workers };
    for x in [0.5, 2.4e-2] {
        let p = DimensionlessParams::new(1.0, 10.0, x)?;
        let e = ThermalEnsemble::new(x)?;
        let (mut quad_dev, mut sigma_dev) = (0.0_f64, 0.0_f64);
        for tau in comparison_taus() {
            let exact = averaged_rho_closed(&e, &p, tau, &MirrorModel::ClassicalThermal);
            let quad = averaged_rho_quadrature(&e, &p, tau, cfg.order)?;
            quad_dev = quad_dev.max((quad.as_complex() - exact.as_complex()).norm());
            let mc = averaged_rho_monte_carlo_with(&e, &p, tau, &mc_cfg)?;
            sigma_dev = sigma_dev.max(mc_sigma_deviation(&mc, &exact));
        }
        checks.push(Check::at_most(format!("thermal/quadrature_deviation_x{x:e}"), quad_dev, 1e-10));
        checks.push(Check::at_most(format!("thermal/monte_carlo_sigmas_x{x:e}"), sigma_dev, 4.0));
    }

    for d in sweep_params(cfg)? {
        let label = temperature_label(d.temperature);
        if let Some(dev) = revival_deviation(&d, 4.0 * PI) {
            checks.push(Check::at_most(format!("visibility/{label}/revival_deviation"), dev, 1e-12));
        }
        if !d.is_zero_temperature() {
            checks.push(Check::at_least(format!("visibility/{label}/eta_at_pi"), eta_ratio(&d, PI)?, 1.0));
        }
        let (mut bad_sums, mut route_dev) = (0usize, 0.0_f64);
        for i in 0..200 {
            let tau = 4.0 * PI * i as f64 / 199.0;
            for model in [MirrorModel::ClassicalPointlike(m), MirrorModel::ClassicalThermal, MirrorModel::QuantumThermal] {
                let r = detection_probabilities_trace(&model, &d, tau);
                let c = detection_probabilities_closed(&model, &d, tau);
                bad_sums += usize::from(r.p1 + r.p2 != 1.0);
                route_dev = route_dev.max((r.p1 - c.p1).abs());
            }
        }
        checks.push(Check::at_most(format!("detection/{label}/inexact_probability_sums"), bad_sums as f64, 0.0));
        checks.push(Check::at_most(format!("detection/{label}/trace_vs_closed_form"), route_dev, 1e-12));
        if d.z_cl() >= 3.0 {
            let root = decoherence_time_from_exponent(d.z_cl2, d.mirror_freq).unwrap_or(f64::NAN);
            checks.push(Check::at_most(format!("times/{label}/root_vs_t_cl"), (root / d.t_cl - 1.0).abs(), 1e-2));
            let short = gaussian_short_time_check(&d, 0.1)?;
            checks.push(Check::at_most(format!("times/{label}/short_time_gaussian"), short.max_rel_deviation, short.bound));
        }
    }

    let base = cfg.params.derive()?;
    for x in [1e-2, 5e-2, 1e-1] {
        let d = ReducedParams {
            kappa: base.kappa2.sqrt(),
            omega_ratio: base.omega_ratio,
            mirror_freq: base.mirror_freq,
            temperature: None,
            x_th: Some(x),
            mass: None,
        }
        .derive()?;
        let rel = (high_temperature_expansion(&d)? / d.z_qm2 - 1.0).abs();
        checks.push(Check::at_most(format!("params/high_temperature_series_x{x:e}"), rel, x.powi(4) / 500.0));
    }

    let mut csv = String::from("check,value,threshold,pass\n");
    for c in &checks {
        let _ = writeln!(csv, "{},{:?},{:?},{}", c.name, c.value, c.threshold, c.passed);
    }
    em.write("validate.csv", &csv)?;
    Ok(checks)
}

pub fn mc_convergence(cfg: &RunConfig, em: &mut Emitter) -> Result<Vec<Check>, CliError> {
    let d = cfg.params.derive()?;
    let p = d.dimensionless();
    let e = ThermalEnsemble::from(&p);
    let exact = averaged_rho_closed(&e, &p, cfg.mc_tau, &MirrorModel::ClassicalThermal);
    let mut csv = String::from("n,re,im,stderr_re,stderr_im,abs_err_re,abs_err_im\n");
    let mut rows = Vec::new();
    for &n in &cfg.ladder {
        let mc = averaged_rho_monte_carlo_with(&e, &p, cfg.mc_tau, &MonteCarloConfig { samples: n, seed: cfg.seed, workers: cfg.workers })?;
        let _ = writeln!(
            csv,
            "{n},{:?},{:?},{:?},{:?},{:?},{:?}",
            mc.re,
            mc.im,
            mc.stderr_re,
            mc.stderr_im,
            (mc.re - exact.re).abs(),
            (mc.im - exact.im).abs()
        );
        rows.push(mc);
    }
    em.write("mc_convergence.csv", &csv)?;

    let mut checks = Vec::new();
    for w in rows.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        // stderr ratio against the ideal 1/sqrt(n), expressed per decade of n
        let decades = (b.samples as f64 / a.samples as f64).log10();
        let observed = a.stderr_re.hypot(a.stderr_im) / b.stderr_re.hypot(b.stderr_im);
        let ideal = (b.samples as f64 / a.samples as f64).sqrt();
        let per_decade = (observed / ideal).ln().abs() / decades;
        checks.push(Check::at_most(
            format!("stderr_scaling_{}_to_{}", a.samples, b.samples),
            per_decade.exp(),
            1.5,
        ));
    }
    let last = rows.last().expect("ladder has at least three rungs");
    checks.push(Check::at_most(format!("sigmas_at_n{}", last.samples), mc_sigma_deviation(last, &exact), 4.0));
    if cfg.svg {
        let pts = |f: fn(&AveragedCoherence) -> f64| rows.iter().map(|r| ((r.samples as f64).log10(), f(r).log10())).collect();
        let plot = Plot {
            title: format!("Monte Carlo convergence at tau = {}", cfg.mc_tau),
            x_label: "log10 n".into(),
            y_label: "log10 stderr".into(),
            series: vec![
                Series { label: "stderr re".into(), points: pts(|r| r.stderr_re) },
                Series { label: "stderr im".into(), points: pts(|r| r.stderr_im) },
            ],
        };
        em.write("mc_convergence.svg", &plot.render())?;
    }
    Ok(checks)
}
