mod common;

use nalgebra::DMatrix;
use squidcav_core::constants::ghz_to_rad_per_s;
use squidcav_core::coupling::EffectiveParams;
use squidcav_core::protocols::{generate_bell, transfer_state, Decoherence, RunOptions, Switching};
use squidcav_core::scalar::cplx;

#[test]
fn bell_full_model_stays_dispersive() {
    let (m, eff) = common::full_model(10.0, 5, None);
    let r = generate_bell(&m, &eff, &RunOptions::default()).unwrap().report;
    let peaks = r.peak_populations.unwrap();
    eprintln!("adiabatic: F = {:.6} P_a = {:.4} n = {:.4}", r.fidelity, peaks.p_a, peaks.n_photon);
    assert!(r.fidelity >= 0.95);
    assert!(peaks.p_a <= 0.02 && peaks.n_photon <= 0.02);
    assert!(r.extras["concurrence"] > 0.95);
}

#[test]
fn bell_sudden_switching_is_worse_but_close() {
    let (m, eff) = common::full_model(10.0, 5, None);
    let opts = RunOptions { switching: Switching::Sudden, ..RunOptions::default() };
    let r = generate_bell(&m, &eff, &opts).unwrap().report;
    let adiabatic = generate_bell(&m, &eff, &RunOptions::default()).unwrap().report;
    assert!(r.fidelity >= 0.95 && r.fidelity < adiabatic.fidelity);
}

#[test]
fn transfer_full_model() {
    let (m, eff) = common::full_model(10.0, 5, None);
    for (a, b) in [(cplx(1.0, 0.0), cplx(0.0, 0.0)), (cplx(0.6, 0.0), cplx(0.0, 0.8)), (cplx(0.0, 0.0), cplx(1.0, 0.0))] {
        let r = transfer_state(&m, &eff, a, b, &RunOptions::default()).unwrap().report;
        assert!(r.fidelity >= 0.95, "alpha {a} beta {b}: {}", r.fidelity);
    }
}

#[test]
fn bell_with_decoherence() {
    let (m, eff) = common::full_model(10.0, 5, Some(2e4));
    let omega_c = ghz_to_rad_per_s(common::OMEGA_C_GHZ);
    let opts = RunOptions {
        decoherence: Some(Decoherence { t1: Some(15e-6), kappa: Some(omega_c / 2e4) }),
        samples: 101,
        ..RunOptions::default()
    };
    let r = generate_bell(&m, &eff, &opts).unwrap().report;
    let closed = generate_bell(&m, &eff, &RunOptions::default()).unwrap().report;
    eprintln!("open-system F = {:.6} (closed {:.6}), C = {:.4}", r.fidelity, closed.fidelity, r.extras["concurrence"]);
    assert!(r.fidelity >= 0.90);
    assert!(r.fidelity <= closed.fidelity + 1e-9);
}

fn bell_fidelity(ratio: f64, switching: Switching) -> f64 {
    let (m, eff) = common::full_model(ratio, 5, None);
    let opts = RunOptions { switching, samples: 201, ..RunOptions::default() };
    generate_bell(&m, &eff, &opts).unwrap().report.fidelity
}

#[test]
fn sudden_fidelity_degrades_as_detunings_shrink() {
    let f: Vec<f64> = [20.0, 10.0, 5.0].iter().map(|&r| bell_fidelity(r, Switching::Sudden)).collect();
    assert!(f[0] >= f[1] && f[1] >= f[2], "{f:?}");
}

/// Exchange rate of the one-excitation sector from its exact
/// antisymmetric (2×2) and symmetric (3×3, with the photon) blocks.
fn exact_exchange_rate(ratio: f64) -> (f64, f64) {
    let eff = EffectiveParams::<f64>::with_ratio(ratio);
    let (d, w, dc, g2) = (eff.delta, eff.omega, eff.delta_c, 2f64.sqrt() * eff.g);
    let anti = DMatrix::from_row_slice(2, 2, &[d, w, w, dc]);
    let sym = DMatrix::from_row_slice(3, 3, &[d, w, 0.0, w, dc, g2, 0.0, g2, 0.0]);
    let near = |m: DMatrix<f64>| {
        let e = m.symmetric_eigen().eigenvalues;
        e.iter().copied().min_by(|a, b| (a - d).abs().total_cmp(&(b - d).abs())).unwrap()
    };
    ((near(sym) - near(anti)) / 2.0, eff.gamma)
}

#[test]
fn adiabatic_fidelity_is_set_by_exchange_rate_renormalization() {
    for ratio in [20.0, 10.0, 5.0] {
        let (j, gamma) = exact_exchange_rate(ratio);
        let predicted = ((j.abs() / gamma - 1.0) * std::f64::consts::FRAC_PI_4).cos().powi(2);
        let f = bell_fidelity(ratio, Switching::Adiabatic);
        assert!((f - predicted).abs() < 2e-3, "ratio {ratio}: {f} vs {predicted}");
    }
}

#[test]
fn fock_truncation_is_converged() {
    let (m5, eff) = common::full_model(10.0, 5, None);
    let (m7, _) = common::full_model(10.0, 7, None);
    let a = generate_bell(&m5, &eff, &RunOptions::default()).unwrap().report.fidelity;
    let b = generate_bell(&m7, &eff, &RunOptions::default()).unwrap().report.fidelity;
    assert!((a - b).abs() < 1e-12);
}
