use squidcav_core::constants::ghz_to_rad_per_s;
use squidcav_core::coupling::{
    cavity_field_for_g, coupling_g, effective_params, matched_drive_frequency, microwave_field_for_omega, rabi_omega,
    CavityParams, CouplingInputs, DriveParams,
};
use squidcav_core::spectrum::{solve_squid_spectrum_with, GridConfig, SquidParams};

#[test]
fn field_integrals_round_trip_to_target_couplings() {
    let squid = SquidParams::<f64>::nominal();
    let spec = solve_squid_spectrum_with(&squid, &GridConfig::default(), 3).unwrap();
    let omega_c = ghz_to_rad_per_s(29.7);
    let (g, omega) = (1.8e8, 1.5e8);
    let inputs = CouplingInputs {
        cavity_field_integral: cavity_field_for_g(&spec, g, omega_c, &squid),
        microwave_field_integral: microwave_field_for_omega(&spec, omega, &squid),
    };
    let cavity = CavityParams { omega_c, g, n_max: 5, quality_factor: Some(2e4) };
    assert!((coupling_g(&spec, &inputs, &cavity, &squid).unwrap() - g).abs() / g < 1e-12);
    assert!((rabi_omega(&spec, &inputs, &squid).unwrap() - omega).abs() / omega < 1e-12);

    // A drive placed Δ_μw below ω_a1 with δ = 3×10⁸ s⁻¹.
    let delta_c = spec.omega_a0 - omega_c;
    let omega_uw = matched_drive_frequency(&spec, omega_c, 3e8);
    let eff = effective_params(&spec, &cavity, &DriveParams { omega, omega_uw }).unwrap();
    assert!((eff.delta_c - delta_c).abs() < 1e-3);
    assert!((eff.delta - 3e8).abs() / 3e8 < 1e-9);
    let expect_geff = omega * g / 2.0 * (1.0 / eff.delta_c + 1.0 / eff.delta_uw);
    assert!((eff.g_eff - expect_geff).abs() / expect_geff < 1e-14);
}

#[test]
fn coupling_scales_linearly_in_field() {
    let squid = SquidParams::<f64>::nominal();
    let spec = solve_squid_spectrum_with(&squid, &GridConfig::default(), 3).unwrap();
    let cavity = CavityParams { omega_c: ghz_to_rad_per_s(29.7), g: 0.0, n_max: 3, quality_factor: None };
    let at = |b: f64| {
        let inputs = CouplingInputs { cavity_field_integral: b, microwave_field_integral: b };
        (coupling_g(&spec, &inputs, &cavity, &squid).unwrap(), rabi_omega(&spec, &inputs, &squid).unwrap())
    };
    let (g1, o1) = at(1e-12);
    let (g2, o2) = at(3e-12);
    assert!((g2 - 3.0 * g1).abs() <= 1e-12 * g2.abs());
    assert!((o2 - 3.0 * o1).abs() <= 1e-12 * o2.abs());
    assert!(coupling_g(&spec, &CouplingInputs { cavity_field_integral: -1.0, microwave_field_integral: 0.0 }, &cavity, &squid).is_err());
}
