//! The numerical core instantiated at f32.

use squidcav_core::coupling::EffectiveParams;
use squidcav_core::model::{build_effective, Variant};
use squidcav_core::protocols::{cnot_unitary, generate_bell, stark_error, CnotReading, RunOptions};
use squidcav_core::scalar::cplx;
use squidcav_core::spectrum::{solve_squid_spectrum_with, GridConfig, SquidParams};

#[test]
fn effective_protocols_in_f32() {
    let eff = EffectiveParams::<f32>::nominal();
    assert!((eff.delta - 3.0e8).abs() / 3.0e8 < 1e-6);
    let m = build_effective(Variant::EffTwoVacuum, &eff, 1).unwrap();
    let r = generate_bell(&m, &eff, &RunOptions::default()).unwrap().report;
    assert!((r.fidelity - 1.0).abs() < 1e-4);
    let check = cnot_unitary(&eff, &CnotReading::resolved());
    // The 1e-10 verification threshold is below f32 resolution.
    assert!(check.is_err() || check.unwrap().distance < 1e-3);
    let s = std::f32::consts::FRAC_1_SQRT_2;
    let z = cplx(0.0f32, 0.0);
    let e = stark_error(&[cplx(s, 0.0), z, z, cplx(s, 0.0)], 0.9f32).unwrap();
    assert!((e.closed_form - 0.9f32.sin().powi(2)).abs() < 1e-5);
}

#[test]
fn spectrum_in_f32() {
    let grid = GridConfig { num_points: 256, check_convergence: false, ..GridConfig::default() };
    let f32_spec = solve_squid_spectrum_with(&SquidParams::<f32>::nominal(), &grid, 3).unwrap();
    let f64_spec = solve_squid_spectrum_with(&SquidParams::<f64>::nominal(), &grid, 3).unwrap();
    let rel = (f32_spec.omega_a0_ghz() - f64_spec.omega_a0_ghz()).abs() / f64_spec.omega_a0_ghz();
    assert!(rel < 1e-3, "relative difference {rel}");
}
