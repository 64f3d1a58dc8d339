use squidcav_core::constants::ghz_to_rad_per_s;
use squidcav_core::coupling::{CavityParams, EffectiveParams};
use squidcav_core::dynamics::{evolve_lab_hamiltonian, evolve_static, fidelity, lab_to_model_frame, StateVector};
use squidcav_core::model::{build_full_rotating, LabHamiltonian, SquidChannel};

fn setup(n_max: usize) -> (Vec<SquidChannel<f64>>, CavityParams<f64>) {
    let eff = EffectiveParams::<f64>::nominal();
    let omega_c = ghz_to_rad_per_s(29.7);
    let ch = SquidChannel::from_effective(&eff, omega_c, ghz_to_rad_per_s(20.0));
    (vec![ch], CavityParams { omega_c, g: eff.g, n_max, quality_factor: None })
}

#[test]
fn lab_frame_oracle_matches_rotating_frame() {
    let (ch, cav) = setup(2);
    let model = build_full_rotating(&ch, &cav).unwrap();
    let lab = LabHamiltonian::new(&ch, &cav).unwrap();
    let t = 10.0 / cav.g;
    let i1 = model.basis.find(&[1], 0).unwrap();
    let psi0 = StateVector::basis(model.dim(), i1);
    let start = std::time::Instant::now();
    let (traj, stats) = evolve_lab_hamiltonian(&lab, &psi0, t, 2, 1e-12).unwrap();
    eprintln!("{stats:?} {:?}", start.elapsed());
    let rot = evolve_static(&model, &psi0, t, 2).unwrap();
    let lab_final = traj.final_state().unwrap().amplitudes();
    let unwound = lab_to_model_frame(&model, lab_final, t).unwrap();
    let f = fidelity(&StateVector::new(unwound.clone()).unwrap(), rot.final_state().unwrap(), false).unwrap();
    eprintln!("phase-sensitive fidelity 1-F = {:e}, norm drift {:e}", 1.0 - f, unwound.norm() - 1.0);
    assert!(f > 1.0 - 1e-8);
}

#[test]
fn free_lab_evolution_is_pure_phase() {
    let (mut ch, mut cav) = setup(2);
    ch[0].g = 0.0;
    ch[0].drive.omega = 0.0;
    cav.g = 0.0;
    let lab = LabHamiltonian::new(&ch, &cav).unwrap();
    let dim = lab.basis.dim();
    let psi0 = StateVector::normalized(squidcav_core::scalar::CVec::from_fn(dim, |i, _| {
        squidcav_core::scalar::cplx(1.0 + i as f64, 0.5 * i as f64)
    }))
    .unwrap();
    let t = 2e-10;
    let (traj, _) = evolve_lab_hamiltonian(&lab, &psi0, t, 5, 1e-12).unwrap();
    for (s, &tk) in traj.states().unwrap().iter().zip(&traj.times) {
        for k in 0..dim {
            let expect = psi0.amplitudes()[k] * squidcav_core::scalar::cis(-lab.static_part[(k, k)].re * tk);
            assert!((s.amplitudes()[k] - expect).norm() < 1e-9, "k = {k}, t = {tk}");
        }
    }
}

#[test]
fn halving_tolerance_converges_toward_reference() {
    let (ch, cav) = setup(2);
    let lab = LabHamiltonian::new(&ch, &cav).unwrap();
    let i1 = lab.basis.find(&[1], 0).unwrap();
    let psi0 = StateVector::basis(lab.basis.dim(), i1);
    let t = 1.0 / cav.g;
    let run = |tol: f64| evolve_lab_hamiltonian(&lab, &psi0, t, 2, tol).unwrap().0.final_state().unwrap().amplitudes().clone();
    let reference = run(1e-12);
    let deviations: Vec<f64> = (0..6).map(|k| (run(1e-7 / 2f64.powi(k)) - &reference).norm()).collect();
    eprintln!("{deviations:?}");
    assert!(deviations.windows(2).all(|w| w[1] < w[0]), "{deviations:?}");
}
