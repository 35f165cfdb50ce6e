//! Cross-checks between independent routes: numerical integration against
//! the closed forms, and the three thermal averages against each other.

use std::f64::consts::PI;

use optohybrid::analytic::{closed_form_state, rho_ab_from_state, rho_ab_pointlike};
use optohybrid::decoherence::{
    averaged_rho_closed, averaged_rho_monte_carlo, averaged_rho_quadrature, MirrorModel, ThermalEnsemble,
};
use optohybrid::dynamics::{integrate, HybridState, StepControl};
use optohybrid::{DimensionlessParams, MirrorPhasePoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fixed_step(omega_ratio: f64) -> StepControl {
    StepControl::Fixed { step: 2e-3 / omega_ratio.max(1.0) }
}

#[test]
fn integration_matches_closed_forms_at_random_points() {
    let p = DimensionlessParams { kappa: 1.0, omega_ratio: 10.0, x_th: 1.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let m = MirrorPhasePoint::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let tau = rng.random_range(0.05..4.0 * PI);
        let traj = integrate(&HybridState::prepared(m.q0, m.pi0), &p, tau, 2, fixed_step(p.omega_ratio)).unwrap();
        let exact = closed_form_state(&m, &p, tau);
        let dev = traj.final_state().max_abs_diff(&exact);
        assert!(dev <= 1e-8, "m={m:?} tau={tau}: {dev:e}");
        let num = rho_ab_from_state(traj.final_state());
        let closed = rho_ab_pointlike(&m, &p, tau);
        assert!((num.re - closed.re).abs() <= 1e-8 && (num.im - closed.im).abs() <= 1e-8);
    }
}

#[test]
fn stiff_photon_frequency_still_matches() {
    let p = DimensionlessParams { kappa: 1.0, omega_ratio: 1e3, x_th: 1.0 };
    let m = MirrorPhasePoint::new(0.3, -0.7);
    let traj = integrate(&HybridState::prepared(m.q0, m.pi0), &p, 2.0 * PI, 5, fixed_step(p.omega_ratio)).unwrap();
    for (tau, s) in traj.tau_grid.iter().zip(&traj.states) {
        assert!(s.max_abs_diff(&closed_form_state(&m, &p, *tau)) <= 1e-8, "tau={tau}");
    }
    assert!(traj.max_n_drift() <= 1e-9);
}

#[test]
fn arm_b_is_a_pure_rotation() {
    let p = DimensionlessParams { kappa: 1.3, omega_ratio: 4.0, x_th: 1.0 };
    let traj = integrate(&HybridState::prepared(2.0, -1.0), &p, 3.0, 7, fixed_step(4.0)).unwrap();
    for (tau, s) in traj.tau_grid.iter().zip(&traj.states) {
        assert!((s.a_b - (4.0 * tau).cos()).abs() < 1e-10);
        assert!((s.b_b + (4.0 * tau).sin()).abs() < 1e-10);
    }
}

#[test]
fn three_way_thermal_average_at_warm_ensemble() {
    let p = DimensionlessParams { kappa: 1.0, omega_ratio: 10.0, x_th: 0.5 };
    let e = ThermalEnsemble::from(&p);
    for k in 0..10 {
        let tau = 4.0 * PI * (k as f64 + 0.5) / 10.0;
        let closed = averaged_rho_closed(&e, &p, tau, &MirrorModel::ClassicalThermal);
        let quad = averaged_rho_quadrature(&e, &p, tau, 40).unwrap();
        assert!((quad.re - closed.re).abs() <= 1e-10 && (quad.im - closed.im).abs() <= 1e-10);
        let mc = averaged_rho_monte_carlo(&e, &p, tau, 20_000, 99 + k).unwrap();
        assert!((mc.re - closed.re).abs() <= 4.0 * mc.stderr_re, "tau={tau}");
        assert!((mc.im - closed.im).abs() <= 4.0 * mc.stderr_im, "tau={tau}");
    }
}

#[test]
fn monte_carlo_pins_the_phase_sign() {
    // weak damping so the phase is resolved well above the noise
    let p = DimensionlessParams { kappa: 1.0, omega_ratio: 10.0, x_th: 50.0 };
    let e = ThermalEnsemble::from(&p);
    let tau = 2.0;
    let closed = averaged_rho_closed(&e, &p, tau, &MirrorModel::ClassicalThermal);
    let conj_im = -closed.im;
    let mc = averaged_rho_monte_carlo(&e, &p, tau, 50_000, 5).unwrap();
    assert!(closed.im.abs() > 0.1);
    assert!((mc.im - closed.im).abs() <= 4.0 * mc.stderr_im);
    assert!((mc.im - conj_im).abs() > 100.0 * mc.stderr_im);
}

#[test]
fn monte_carlo_stderr_scales_as_inverse_root_n() {
    let p = DimensionlessParams { kappa: 1.0, omega_ratio: 10.0, x_th: 0.5 };
    let e = ThermalEnsemble::from(&p);
    let small = averaged_rho_monte_carlo(&e, &p, 1.7, 10_000, 3).unwrap();
    let large = averaged_rho_monte_carlo(&e, &p, 1.7, 100_000, 3).unwrap();
    for (s, l) in [(small.stderr_re, large.stderr_re), (small.stderr_im, large.stderr_im)] {
        let ratio = s / l / 10f64.sqrt();
        assert!((1.0 / 1.5..=1.5).contains(&ratio), "{ratio}");
    }
}
