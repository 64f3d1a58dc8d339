mod common;

use proptest::prelude::*;
use squidcav_core::coupling::{CavityParams, DriveParams, EffectiveParams};
use squidcav_core::dynamics::{
    evolve_lindblad, evolve_static, CollapseChannel, StateVector, DENSITY_MIN_EIGENVALUE, NORM_TOLERANCE,
    TRACE_TOLERANCE,
};
use squidcav_core::linalg::{self, commutator, HermitianEigen};
use squidcav_core::model::{build_effective, build_full_rotating, SquidChannel, SystemModel, Variant, LEVEL_0};
use squidcav_core::scalar::{cplx, CVec};

#[derive(Clone, Debug)]
struct Squid {
    g: f64,
    omega: f64,
    delta_c: f64,
    delta_uw: f64,
}

fn squid() -> impl Strategy<Value = Squid> {
    (5e7..3e8f64, 0.5..1.5f64, 3.0..30.0f64, 3.0..30.0f64).prop_map(|(g, w, rc, ru)| {
        let omega = g * w;
        Squid { g, omega, delta_c: rc * g, delta_uw: ru * omega }
    })
}

fn full_model(squids: &[Squid], n_max: usize) -> SystemModel<f64> {
    let omega_c = 2e11;
    let omega_uw = 1.3e11;
    let ch: Vec<_> = squids
        .iter()
        .map(|s| SquidChannel {
            omega_a0: omega_c + s.delta_c,
            omega_a1: omega_uw + s.delta_uw,
            g: s.g,
            drive: DriveParams { omega: s.omega, omega_uw },
        })
        .collect();
    let g = squids[0].g;
    build_full_rotating(&ch, &CavityParams { omega_c, g, n_max, quality_factor: None }).unwrap()
}

fn scale(m: &SystemModel<f64>) -> f64 {
    linalg::max_abs(&m.hamiltonian).max(1.0)
}

fn state_from_seed(seed: u64, dim: usize) -> StateVector<f64> {
    StateVector::new(common::random_state(&mut common::rng(seed), dim)).unwrap()
}

fn check_closed(m: &SystemModel<f64>, t: f64, seed: u64) -> Result<(), TestCaseError> {
    let s = scale(m);
    prop_assert!(m.hermiticity_defect() / s < 1e-14);
    let n = m.excitation_number();
    prop_assert!(linalg::max_abs(&commutator(&m.hamiltonian, &n)) / s < 1e-12);
    let u = HermitianEigen::new(&m.hamiltonian).propagator(t);
    prop_assert!(linalg::unitarity_defect(&u) < 1e-10);
    let traj = evolve_static(m, &state_from_seed(seed, m.dim()), t, 9).unwrap();
    for o in &traj.observables {
        prop_assert!((o.norm - 1.0).abs() < NORM_TOLERANCE);
    }
    let ex = |psi: &CVec<f64>| psi.dotc(&(&n * psi)).re;
    let states = traj.states().unwrap();
    let e0 = ex(states[0].amplitudes());
    for st in states {
        prop_assert!((ex(st.amplitudes()) - e0).abs() < 1e-9);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn full_model_invariants(squids in prop::collection::vec(squid(), 1..=2), n_max in 1usize..=4, gt in 0.1..50.0f64, seed: u64) {
        let m = full_model(&squids, n_max);
        check_closed(&m, gt / squids[0].g, seed)?;
    }

    #[test]
    fn effective_model_invariants(s in squid(), n_max in 1usize..=4, variant in prop::sample::select(vec![Variant::EffSingle, Variant::EffTwoPhoton, Variant::EffTwoVacuum]), gt in 0.1..20.0f64, seed: u64) {
        let eff = EffectiveParams::<f64>::from_detunings(s.g, s.omega, s.delta_c, s.delta_uw);
        prop_assume!(eff.is_ok());
        let eff = eff.unwrap();
        prop_assume!(eff.gamma.abs() > 0.0);
        let m = build_effective(variant, &eff, n_max).unwrap();
        check_closed(&m, gt / eff.gamma.abs(), seed)?;
    }

    #[test]
    fn lindblad_stays_physical(s in squid(), n_max in 1usize..=3, t1_us in 0.05..20.0f64, q in 1e2..1e5f64, gt in 1.0..40.0f64, seed: u64) {
        let m = full_model(std::slice::from_ref(&s), n_max);
        let kappa = 2e11 / q;
        let channels = vec![
            CollapseChannel::level_a_decay(&m.basis, 0, LEVEL_0, t1_us * 1e-6).unwrap(),
            CollapseChannel::cavity_decay(&m.basis, kappa).unwrap(),
        ];
        let rho0 = state_from_seed(seed, m.dim()).to_density();
        let traj = evolve_lindblad(&m, &channels, &rho0, gt / s.g, 7).unwrap();
        for rho in traj.densities().unwrap() {
            prop_assert!((rho.trace() - 1.0).abs() < TRACE_TOLERANCE);
            prop_assert!(rho.min_eigenvalue() > DENSITY_MIN_EIGENVALUE);
            prop_assert!(linalg::hermiticity_defect(rho.matrix()) < 1e-10);
            prop_assert!(rho.purity() <= 1.0 + 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 3, ..ProptestConfig::default() })]

    #[test]
    fn lindblad_integrator_path_stays_physical(a in squid(), b in squid(), gt in 0.2..1.0f64, seed: u64) {
        // dim 27 exceeds the superoperator limit and uses the adaptive integrator.
        let m = full_model(&[a.clone(), b], 2);
        let channels = vec![
            CollapseChannel::level_a_decay(&m.basis, 0, LEVEL_0, 1e-7).unwrap(),
            CollapseChannel::level_a_decay(&m.basis, 1, LEVEL_0, 1e-7).unwrap(),
            CollapseChannel::cavity_decay(&m.basis, 1e8).unwrap(),
        ];
        let rho0 = state_from_seed(seed, m.dim()).to_density();
        let traj = evolve_lindblad(&m, &channels, &rho0, gt / a.g, 3).unwrap();
        for rho in traj.densities().unwrap() {
            prop_assert!((rho.trace() - 1.0).abs() < TRACE_TOLERANCE);
            prop_assert!(rho.min_eigenvalue() > DENSITY_MIN_EIGENVALUE);
        }
    }
}

#[test]
fn decay_reduces_purity_of_pure_excited_state() {
    let s = Squid { g: 1.8e8, omega: 1.5e8, delta_c: 1.8e9, delta_uw: 1.5e9 };
    let m = full_model(&[s], 2);
    let ia = m.basis.find(&[2], 0).unwrap();
    let mut v = CVec::zeros(m.dim());
    v[ia] = cplx(1.0, 0.0);
    let rho0 = StateVector::new(v).unwrap().to_density();
    let ch = vec![CollapseChannel::level_a_decay(&m.basis, 0, LEVEL_0, 1e-8).unwrap()];
    let traj = evolve_lindblad(&m, &ch, &rho0, 5e-9, 3).unwrap();
    let p = traj.densities().unwrap().iter().map(|r| r.purity()).collect::<Vec<_>>();
    assert!(p[1] < p[0]);
}
