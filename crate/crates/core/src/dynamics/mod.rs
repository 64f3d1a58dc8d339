//! Time evolution: static propagation, lab-frame integration and Lindblad
//! master equations, with eager observable recording.

mod lindblad;
mod metrics;
mod ode;

pub use lindblad::{evolve_lindblad, lindblad_rhs, liouvillian, SUPEROPERATOR_MAX_DIM};
pub use metrics::{concurrence, concurrence_mixed, fidelity, mixed_fidelity, peak_populations, PopulationKind};
pub use ode::{integrate_dp45, OdeStats, TOL_MAX, TOL_MIN};

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, HermitianEigen};
use crate::coupling::CavityParams;
use crate::model::{Basis, LabHamiltonian, SquidChannel, SystemModel, LEVEL_A};
use crate::scalar::{lit, tolerance, CMat, CVec, Real};

/// Normalization tolerance enforced when a state is constructed.
pub const NORM_TOLERANCE: f64 = 1e-9;
/// Trace tolerance enforced when a density matrix is constructed.
pub const TRACE_TOLERANCE: f64 = 1e-8;
/// Minimum eigenvalue accepted for a constructed density matrix.
pub const DENSITY_MIN_EIGENVALUE: f64 = -1e-8;
/// Hermiticity tolerance for a constructed density matrix.
pub const DENSITY_HERMITICITY: f64 = 1e-10;

/// Normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T: Real> {
    amps: CVec<T>,
}

impl<T: Real> StateVector<T> {
    pub fn new(amps: CVec<T>) -> Result<Self> {
        let norm = amps.norm();
        if (norm - T::one()).abs() > tolerance(NORM_TOLERANCE) {
            return Err(Error::NotNormalized { norm: crate::scalar::to_f64(norm) });
        }
        Ok(Self { amps })
    }

    /// Normalizes a nonzero vector.
    pub fn normalized(amps: CVec<T>) -> Result<Self> {
        let norm = amps.norm();
        if !(norm > T::zero()) {
            return Err(invalid("state", "zero vector cannot be normalized"));
        }
        Ok(Self { amps: amps.unscale(norm) })
    }

    /// Basis state `|index⟩` of a `dim`-dimensional space.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amps = CVec::zeros(dim);
        amps[index] = crate::scalar::re(T::one());
        Self { amps }
    }

    pub(crate) fn from_raw(amps: CVec<T>) -> Self {
        Self { amps }
    }

    pub fn amplitudes(&self) -> &CVec<T> {
        &self.amps
    }

    pub fn into_amplitudes(self) -> CVec<T> {
        self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> T {
        self.amps.norm()
    }

    pub fn to_density(&self) -> DensityMatrix<T> {
        DensityMatrix { rho: &self.amps * self.amps.adjoint() }
    }
}

/// Unit-trace positive Hermitian operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T: Real> {
    rho: CMat<T>,
}

impl<T: Real> DensityMatrix<T> {
    pub fn new(rho: CMat<T>) -> Result<Self> {
        if !rho.is_square() {
            return Err(Error::DimensionMismatch { expected: rho.nrows(), actual: rho.ncols() });
        }
        let trace = rho.trace();
        if (trace.re - T::one()).abs() > tolerance(TRACE_TOLERANCE) || trace.im.abs() > tolerance(TRACE_TOLERANCE) {
            return Err(invalid("rho", format!("trace {} differs from 1", crate::scalar::to_f64(trace.re))));
        }
        let herm = linalg::max_abs(&(&rho - rho.adjoint()));
        if herm > tolerance(DENSITY_HERMITICITY) {
            return Err(invalid("rho", "not Hermitian"));
        }
        let min = min_eigenvalue(&rho);
        if min < -tolerance::<T>(-DENSITY_MIN_EIGENVALUE) {
            return Err(invalid("rho", format!("negative eigenvalue {}", crate::scalar::to_f64(min))));
        }
        Ok(Self { rho })
    }

    pub(crate) fn from_raw(rho: CMat<T>) -> Self {
        Self { rho }
    }

    pub fn matrix(&self) -> &CMat<T> {
        &self.rho
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn trace(&self) -> T {
        self.rho.trace().re
    }

    pub fn min_eigenvalue(&self) -> T {
        min_eigenvalue(&self.rho)
    }

    pub fn purity(&self) -> T {
        (&self.rho * &self.rho).trace().re
    }
}

pub(crate) fn min_eigenvalue<T: Real>(rho: &CMat<T>) -> T {
    let eig = HermitianEigen::new(rho);
    eig.values.iter().copied().fold(T::max_value().unwrap_or_else(T::one), |a, b| a.min(b))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelLabel {
    LevelADecay,
    CavityDecay,
    Custom,
}

/// Lindblad jump operator `L` with rate `γ` (dissipator γ(LρL† - ½{L†L, ρ})).
#[derive(Clone, Debug)]
pub struct CollapseChannel<T: Real> {
    pub op: CMat<T>,
    pub rate: T,
    pub label: ChannelLabel,
}

impl<T: Real> CollapseChannel<T> {
    pub fn new(op: CMat<T>, rate: T, label: ChannelLabel) -> Result<Self> {
        if !(rate >= T::zero()) {
            return Err(invalid("rate", "collapse rate must be >= 0"));
        }
        Ok(Self { op, rate, label })
    }

    /// |to⟩⟨a| on SQUID `site` at rate 1/T₁.
    pub fn level_a_decay(basis: &Basis, site: usize, to_level: u8, t1: T) -> Result<Self> {
        if !(t1 > T::zero()) {
            return Err(invalid("T1", "must be > 0"));
        }
        Self::new(basis.sigma(site, to_level, LEVEL_A), T::one() / t1, ChannelLabel::LevelADecay)
    }

    /// Photon loss `c` at rate κ.
    pub fn cavity_decay(basis: &Basis, kappa: T) -> Result<Self> {
        if !basis.has_cavity() {
            return Err(invalid("cavity_decay", "model has no cavity"));
        }
        Self::new(basis.annihilation(), kappa, ChannelLabel::CavityDecay)
    }
}

/// Populations recorded at every sample.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Observables<T> {
    /// Populations of the register states |0…0⟩ … |1…1⟩ (SQUID I most
    /// significant), summed over photon numbers.
    pub logical: Vec<T>,
    /// Σ_i P(SQUID i in |a⟩).
    pub pop_a_total: T,
    /// ⟨c†c⟩.
    pub n_photon: T,
    /// Total probability (norm² or trace).
    pub norm: T,
}

impl<T: Real> Observables<T> {
    /// Builds the record from basis-state probabilities.
    pub fn from_probabilities(basis: &Basis, probs: impl Iterator<Item = T>) -> Self {
        let mut logical = vec![T::zero(); 1 << basis.n_squids()];
        let (mut pop_a, mut nph, mut norm) = (T::zero(), T::zero(), T::zero());
        for (s, p) in basis.states().iter().zip(probs) {
            norm += p;
            if let Some(k) = s.logical_index() {
                logical[k] += p;
            }
            let n_a = s.levels.iter().filter(|&&l| l == LEVEL_A).count();
            pop_a += p * lit(n_a as f64);
            nph += p * lit(s.photons as f64);
        }
        Self { logical, pop_a_total: pop_a, n_photon: nph, norm }
    }

    pub fn of_state(basis: &Basis, psi: &CVec<T>) -> Self {
        Self::from_probabilities(basis, psi.iter().map(|a| a.norm_sqr()))
    }

    pub fn of_density(basis: &Basis, rho: &CMat<T>) -> Self {
        Self::from_probabilities(basis, (0..rho.nrows()).map(|i| rho[(i, i)].re))
    }
}

#[derive(Clone, Debug)]
pub enum Samples<T: Real> {
    Pure(Vec<StateVector<T>>),
    Mixed(Vec<DensityMatrix<T>>),
}

/// Uniformly sampled evolution record.
#[derive(Clone, Debug)]
pub struct Trajectory<T: Real> {
    pub times: Vec<T>,
    pub samples: Samples<T>,
    pub observables: Vec<Observables<T>>,
    /// Optional per-sample fidelity against a protocol target.
    pub fidelity_vs_target: Option<Vec<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> Option<&StateVector<T>> {
        match &self.samples {
            Samples::Pure(v) => v.last(),
            Samples::Mixed(_) => None,
        }
    }

    pub fn final_density(&self) -> Option<DensityMatrix<T>> {
        match &self.samples {
            Samples::Pure(v) => v.last().map(StateVector::to_density),
            Samples::Mixed(v) => v.last().cloned(),
        }
    }

    pub fn states(&self) -> Option<&[StateVector<T>]> {
        match &self.samples {
            Samples::Pure(v) => Some(v),
            Samples::Mixed(_) => None,
        }
    }

    pub fn densities(&self) -> Option<&[DensityMatrix<T>]> {
        match &self.samples {
            Samples::Pure(_) => None,
            Samples::Mixed(v) => Some(v),
        }
    }
}

/// Uniform sample times: `samples == 1` gives `[t]`, otherwise `t·k/(samples-1)`.
pub fn sample_times<T: Real>(t: T, samples: usize) -> Result<Vec<T>> {
    if samples == 0 {
        return Err(invalid("samples", "must be >= 1"));
    }
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(invalid("t", "must be finite and >= 0"));
    }
    if samples == 1 {
        return Ok(vec![t]);
    }
    if t == T::zero() {
        return Err(invalid("t", "must be > 0 for more than one sample"));
    }
    let last: T = lit((samples - 1) as f64);
    Ok((0..samples)
        .map(|k| if k + 1 == samples { t } else { t * lit::<T>(k as f64) / last })
        .collect())
}

fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

/// ψ(t_k) = exp(-i H t_k) ψ0 via one eigendecomposition reused at every sample.
pub fn evolve_static<T: Real>(
    model: &SystemModel<T>,
    psi0: &StateVector<T>,
    t: T,
    samples: usize,
) -> Result<Trajectory<T>> {
    check_dim(model.dim(), psi0.dim())?;
    let times = sample_times(t, samples)?;
    let eig = HermitianEigen::new(&model.hamiltonian);
    let coeffs = eig.vectors.ad_mul(psi0.amplitudes());
    let mut states = Vec::with_capacity(times.len());
    let mut observables = Vec::with_capacity(times.len());
    for &tk in &times {
        let psi = if tk == T::zero() {
            psi0.amplitudes().clone()
        } else {
            let phased = CVec::from_iterator(
                coeffs.len(),
                coeffs.iter().zip(eig.values.iter()).map(|(c, &e)| *c * crate::scalar::cis(-e * tk)),
            );
            &eig.vectors * phased
        };
        observables.push(Observables::of_state(&model.basis, &psi));
        states.push(StateVector::from_raw(psi));
    }
    Ok(Trajectory { times, samples: Samples::Pure(states), observables, fidelity_vs_target: None })
}

/// Integrates the explicitly time-dependent lab-frame Hamiltonian with an
/// adaptive Dormand–Prince 5(4) scheme. The norm is never renormalized.
pub fn evolve_lab_frame<T: Real>(
    squids: &[SquidChannel<T>],
    cavity: &CavityParams<T>,
    psi0: &StateVector<T>,
    t: T,
    samples: usize,
    tol: T,
) -> Result<Trajectory<T>> {
    let lab = LabHamiltonian::new(squids, cavity)?;
    evolve_lab_hamiltonian(&lab, psi0, t, samples, tol).map(|(traj, _)| traj)
}

/// As [`evolve_lab_frame`] for a prebuilt Hamiltonian; also returns step statistics.
pub fn evolve_lab_hamiltonian<T: Real>(
    lab: &LabHamiltonian<T>,
    psi0: &StateVector<T>,
    t: T,
    samples: usize,
    tol: T,
) -> Result<(Trajectory<T>, OdeStats)> {
    check_dim(lab.basis.dim(), psi0.dim())?;
    let times = sample_times(t, samples)?;
    let (values, stats) = integrate_dp45(|s, y| lab.derivative(s, y), psi0.amplitudes(), &times, tol)?;
    let observables = values.iter().map(|psi| Observables::of_state(&lab.basis, psi)).collect();
    let states = values.into_iter().map(StateVector::from_raw).collect();
    Ok((
        Trajectory { times, samples: Samples::Pure(states), observables, fidelity_vs_target: None },
        stats,
    ))
}

/// Converts a lab-frame state at time `t` into the model's rotating frame.
pub fn lab_to_model_frame<T: Real>(model: &SystemModel<T>, psi_lab: &CVec<T>, t: T) -> Result<CVec<T>> {
    check_dim(model.dim(), psi_lab.len())?;
    let phases = model
        .frame
        .lab_phases(&model.basis, t)
        .ok_or_else(|| invalid("frame", "model is not anchored to a lab frame"))?;
    Ok(psi_lab.component_mul(&phases))
}

/// ⟨ψ|H|ψ⟩.
pub fn energy<T: Real>(h: &CMat<T>, psi: &CVec<T>) -> T {
    psi.dotc(&(h * psi)).re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::EffectiveParams;
    use crate::model::{build_effective, Variant};
    use crate::scalar::{cis, cplx};

    #[test]
    fn state_vector_rejects_unnormalized() {
        let v = CVec::<f64>::from_element(2, cplx(1.0, 0.0));
        assert!(matches!(StateVector::new(v.clone()), Err(Error::NotNormalized { .. })));
        assert!((StateVector::normalized(v).unwrap().norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn density_matrix_checks() {
        let mut rho = CMat::<f64>::zeros(2, 2);
        rho[(0, 0)] = cplx(1.2, 0.0);
        rho[(1, 1)] = cplx(-0.2, 0.0);
        assert!(DensityMatrix::new(rho).is_err());
        let psi = StateVector::<f64>::basis(3, 1);
        let d = DensityMatrix::new(psi.to_density().matrix().clone()).unwrap();
        assert!((d.purity() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_time_returns_initial_state() {
        let eff = EffectiveParams::<f64>::nominal();
        let m = build_effective(Variant::EffTwoVacuum, &eff, 1).unwrap();
        let psi0 = StateVector::normalized(CVec::from_vec(vec![
            cplx(0.3, 0.1),
            cplx(0.5, -0.2),
            cplx(0.0, 0.7),
            cplx(0.1, 0.0),
        ]))
        .unwrap();
        let traj = evolve_static(&m, &psi0, 0.0, 1).unwrap();
        assert_eq!(traj.final_state().unwrap(), &psi0);
    }

    #[test]
    fn eq7_amplitudes_for_01() {
        let eff = EffectiveParams::<f64>::nominal();
        let m = build_effective(Variant::EffTwoVacuum, &eff, 1).unwrap();
        let t = 3.0 / eff.gamma;
        let traj = evolve_static(&m, &StateVector::basis(4, 1), t, 64).unwrap();
        for (tk, s) in traj.times.iter().zip(traj.states().unwrap()) {
            let ph = cis(-eff.gamma_prime * tk);
            let a01 = ph * (eff.gamma * tk).cos();
            let a10 = ph * cplx(0.0, -(eff.gamma * tk).sin());
            assert!((s.amplitudes()[1] - a01).norm() < 1e-10);
            assert!((s.amplitudes()[2] - a10).norm() < 1e-10);
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let eff = EffectiveParams::<f64>::nominal();
        let m = build_effective(Variant::EffTwoVacuum, &eff, 1).unwrap();
        assert!(matches!(
            evolve_static(&m, &StateVector::basis(3, 0), 1e-6, 2),
            Err(Error::DimensionMismatch { expected: 4, actual: 3 })
        ));
    }

    #[test]
    fn sample_times_are_uniform_and_end_exactly() {
        let ts = sample_times(1.0e-6_f64, 5).unwrap();
        assert_eq!(ts.len(), 5);
        assert_eq!(ts[0], 0.0);
        assert_eq!(*ts.last().unwrap(), 1.0e-6);
        assert!(ts.windows(2).all(|w| w[1] > w[0]));
        assert!(sample_times(0.0_f64, 3).is_err());
    }
}
