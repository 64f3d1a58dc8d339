use serde::{Deserialize, Serialize};
use nalgebra::ComplexField;

use super::{check_dim, DensityMatrix, StateVector, Trajectory};
use crate::error::{invalid, Result};
use crate::linalg::HermitianEigen;
use crate::scalar::{lit, re, CMat, CVec, Real};

/// State fidelity. With `up_to_global_phase` this is |⟨a|b⟩|²; otherwise the
/// phase-sensitive `max(Re⟨a|b⟩, 0)²`, which equals 1 only for identical states.
pub fn fidelity<T: Real>(a: &StateVector<T>, b: &StateVector<T>, up_to_global_phase: bool) -> Result<T> {
    check_dim(a.dim(), b.dim())?;
    let overlap = a.amplitudes().dotc(b.amplitudes());
    let f = if up_to_global_phase {
        overlap.norm_sqr()
    } else {
        let r = overlap.re.max(T::zero());
        r * r
    };
    Ok(f.min(T::one()))
}

/// ⟨ψ|ρ|ψ⟩.
pub fn mixed_fidelity<T: Real>(rho: &DensityMatrix<T>, psi: &StateVector<T>) -> Result<T> {
    check_dim(rho.dim(), psi.dim())?;
    let v = psi.amplitudes();
    Ok(v.dotc(&(rho.matrix() * v)).re)
}

/// Wootters concurrence of a two-qubit pure state (amplitudes on |00⟩…|11⟩).
pub fn concurrence<T: Real>(psi: &CVec<T>) -> Result<T> {
    check_dim(4, psi.len())?;
    let two: T = lit(2.0);
    Ok(((psi[0] * psi[3] - psi[1] * psi[2]).modulus() * two).min(T::one()))
}

/// Wootters concurrence of a two-qubit density matrix.
pub fn concurrence_mixed<T: Real>(rho: &CMat<T>) -> Result<T> {
    check_dim(4, rho.nrows())?;
    let mut yy = CMat::<T>::zeros(4, 4);
    for (i, s) in [(0usize, -1.0), (1, 1.0), (2, 1.0), (3, -1.0)] {
        yy[(i, 3 - i)] = re(lit(s));
    }
    let tilde = &yy * rho.conjugate() * &yy;
    let sqrt_rho = HermitianEigen::new(rho).apply_fn(|e| re(e.max(T::zero()).sqrt()));
    let m = &sqrt_rho * tilde * &sqrt_rho;
    let mut l: Vec<T> = HermitianEigen::new(&m).values.iter().map(|&e| e.max(T::zero()).sqrt()).collect();
    l.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    Ok((l[0] - l[1] - l[2] - l[3]).max(T::zero()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PopulationKind {
    /// Σ_i P(SQUID i in |a⟩).
    LevelA,
    /// ⟨c†c⟩.
    CavityPhotons,
}

/// Maximum over samples of the selected observable.
pub fn peak_populations<T: Real>(traj: &Trajectory<T>, which: PopulationKind) -> Result<T> {
    if traj.len() < 2 {
        return Err(invalid("trajectory", "needs at least 2 samples"));
    }
    Ok(traj.observables.iter().fold(T::zero(), |m, o| {
        m.max(match which {
            PopulationKind::LevelA => o.pop_a_total,
            PopulationKind::CavityPhotons => o.n_photon,
        })
    }))
}
