//! Logical-register evolution on any model variant.
//!
//! Logical amplitudes (2ⁿ entries, SQUID I most significant) are mapped into
//! the model basis, evolved, and read back in the interaction picture of the
//! bare level energies, which is the frame the effective Hamiltonians live in.

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    evolve_lindblad, evolve_static, CollapseChannel, DensityMatrix, StateVector, Trajectory,
};
use crate::error::{Error, Result};
use crate::linalg::{self, HermitianEigen};
use crate::model::{Basis, SystemModel, Variant, LEVEL_0};
use crate::scalar::{lit, CMat, CVec, Real};

/// How the drives are switched on and off around a protocol step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Switching {
    /// Rectangular pulses: bare logical states are evolved directly.
    Sudden,
    /// Slow ramps: bare logical states map onto the dressed eigenstates
    /// continuously connected to them, and back at the end.
    #[default]
    Adiabatic,
}

/// Decoherence channels, rebuilt on whichever basis is simulated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decoherence<T> {
    /// T₁ of |a⟩ (decay |a⟩ → |0⟩ on each SQUID).
    pub t1: Option<T>,
    /// Cavity photon decay rate κ.
    pub kappa: Option<T>,
}

impl<T: Real> Decoherence<T> {
    pub fn channels(&self, basis: &Basis) -> Result<Vec<CollapseChannel<T>>> {
        let mut out = Vec::new();
        if let Some(t1) = self.t1 {
            if basis.levels_per_squid() == 3 {
                for site in 0..basis.n_squids() {
                    out.push(CollapseChannel::level_a_decay(basis, site, LEVEL_0, t1)?);
                }
            }
        }
        if let Some(kappa) = self.kappa {
            if basis.has_cavity() {
                out.push(CollapseChannel::cavity_decay(basis, kappa)?);
            }
        }
        Ok(out)
    }
}

/// Result of evolving a logical input.
#[derive(Clone, Debug)]
pub struct RegisterRun<T: Real> {
    /// Final logical amplitudes (interaction picture); not renormalized.
    pub logical: CVec<T>,
    /// Final logical density matrix for open-system runs.
    pub logical_density: Option<CMat<T>>,
    pub trajectory: Trajectory<T>,
    /// 1 - Σ logical populations at the end.
    pub leakage: T,
    /// Dimension of the simulated (excitation-restricted) space.
    pub simulated_dim: usize,
    pub basis: Basis,
}

struct Prepared<T: Real> {
    model: SystemModel<T>,
    /// Logical index → model index.
    positions: Vec<Option<usize>>,
    /// Columns: the model-basis image of each present logical state.
    embedding: CMat<T>,
    present: Vec<usize>,
}

fn prepare<T: Real>(model: &SystemModel<T>, logical_in: &CVec<T>, switching: Switching) -> Result<Prepared<T>> {
    let n = model.n_squids();
    let n_reg = 1usize << n;
    if logical_in.len() != n_reg {
        return Err(Error::DimensionMismatch { expected: n_reg, actual: logical_in.len() });
    }
    let max_exc = (0..n_reg)
        .filter(|&k| logical_in[k].norm_sqr() > T::zero())
        .map(|k| k.count_ones() as usize)
        .max()
        .unwrap_or(0);
    let sub = model.restrict_to_excitations(max_exc);
    let positions: Vec<Option<usize>> = (0..n_reg).map(|k| sub.basis.logical_state_index(k)).collect();
    let present: Vec<usize> = (0..n_reg).filter(|&k| positions[k].is_some()).collect();
    let embedding = match (switching, sub.variant) {
        (Switching::Adiabatic, Variant::FullRotating) => dressed_embedding(&sub, &present, &positions)?,
        _ => {
            let mut b = CMat::zeros(sub.dim(), present.len());
            for (col, &k) in present.iter().enumerate() {
                b[(positions[k].expect("present"), col)] = crate::scalar::re(T::one());
            }
            b
        }
    };
    Ok(Prepared { model: sub, positions, embedding, present })
}

/// Orthonormal isometry closest to the bare logical states inside the span of
/// the dressed eigenstates with the largest logical weight, chosen sector by
/// sector of the conserved excitation number.
fn dressed_embedding<T: Real>(model: &SystemModel<T>, present: &[usize], positions: &[Option<usize>]) -> Result<CMat<T>> {
    let d = model.dim();
    let mut bare = CMat::<T>::zeros(d, present.len());
    for (col, &k) in present.iter().enumerate() {
        bare[(positions[k].expect("present"), col)] = crate::scalar::re(T::one());
    }
    let max_sector = present.iter().map(|k| k.count_ones() as usize).max().unwrap_or(0);
    let mut selected: Vec<CVec<T>> = Vec::new();
    for sector in 0..=max_sector {
        let idx: Vec<usize> = (0..d).filter(|&i| model.basis.states()[i].excitations() == sector).collect();
        let logical_rows: Vec<usize> = present
            .iter()
            .filter(|k| k.count_ones() as usize == sector)
            .map(|&k| idx.iter().position(|&i| Some(i) == positions[k]).expect("logical state in its sector"))
            .collect();
        if logical_rows.is_empty() {
            continue;
        }
        let block = CMat::from_fn(idx.len(), idx.len(), |r, c| model.hamiltonian[(idx[r], idx[c])]);
        let eig = HermitianEigen::new(&block);
        let mut weights: Vec<(usize, T)> = (0..idx.len())
            .map(|j| (j, logical_rows.iter().fold(T::zero(), |s, &r| s + eig.vectors[(r, j)].norm_sqr())))
            .collect();
        weights.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
        for &(j, _) in weights.iter().take(logical_rows.len()) {
            let mut v = CVec::zeros(d);
            for (r, &i) in idx.iter().enumerate() {
                v[i] = eig.vectors[(r, j)];
            }
            selected.push(v);
        }
    }
    let mut projected = CMat::<T>::zeros(d, present.len());
    for v in &selected {
        projected += v * (v.adjoint() * &bare);
    }
    let overlap = projected.adjoint() * &projected;
    Ok(&projected * linalg::inv_sqrt_hermitian(&overlap))
}

fn logical_phases<T: Real>(p: &Prepared<T>, t: T) -> Vec<nalgebra::Complex<T>> {
    let phases = p.model.frame.interaction_phases(&p.model.basis, t);
    p.present.iter().map(|&k| phases[p.positions[k].expect("present")]).collect()
}

fn read_logical<T: Real>(p: &Prepared<T>, psi: &CVec<T>, t: T, n_reg: usize) -> CVec<T> {
    let coeffs = p.embedding.ad_mul(psi);
    let phases = logical_phases(p, t);
    let mut out = CVec::zeros(n_reg);
    for (col, &k) in p.present.iter().enumerate() {
        out[k] = coeffs[col] * phases[col];
    }
    out
}

fn prepare_state<T: Real>(p: &Prepared<T>, logical_in: &CVec<T>) -> CVec<T> {
    let amps = CVec::from_iterator(p.present.len(), p.present.iter().map(|&k| logical_in[k]));
    &p.embedding * amps
}

/// Closed-system evolution of a logical input for time `t`.
/// `target`, if given, fills the trajectory's per-sample fidelity column.
pub fn evolve_register<T: Real>(
    model: &SystemModel<T>,
    logical_in: &CVec<T>,
    t: T,
    samples: usize,
    switching: Switching,
    target: Option<&CVec<T>>,
) -> Result<RegisterRun<T>> {
    let n_reg = 1usize << model.n_squids();
    let p = prepare(model, logical_in, switching)?;
    let psi0 = StateVector::new(prepare_state(&p, logical_in))?;
    let mut traj = evolve_static(&p.model, &psi0, t, samples)?;
    if let Some(tgt) = target {
        let states = traj.states().expect("pure trajectory");
        let f = states
            .iter()
            .zip(&traj.times)
            .map(|(s, &tk)| tgt.dotc(&read_logical(&p, s.amplitudes(), tk, n_reg)).norm_sqr())
            .collect();
        traj.fidelity_vs_target = Some(f);
    }
    let last = traj.final_state().expect("at least one sample").amplitudes().clone();
    let logical = read_logical(&p, &last, t, n_reg);
    let leakage = T::one() - logical.norm_squared();
    Ok(RegisterRun {
        logical,
        logical_density: None,
        trajectory: traj,
        leakage,
        simulated_dim: p.model.dim(),
        basis: p.model.basis.clone(),
    })
}

/// Open-system counterpart of [`evolve_register`]; the logical density matrix
/// is read back through the same embedding.
pub fn evolve_register_open<T: Real>(
    model: &SystemModel<T>,
    decoherence: &Decoherence<T>,
    logical_in: &CVec<T>,
    t: T,
    samples: usize,
    switching: Switching,
    target: Option<&CVec<T>>,
) -> Result<RegisterRun<T>> {
    let n_reg = 1usize << model.n_squids();
    let p = prepare(model, logical_in, switching)?;
    let psi0 = StateVector::new(prepare_state(&p, logical_in))?;
    let channels = decoherence.channels(&p.model.basis)?;
    let mut traj = evolve_lindblad(&p.model, &channels, &psi0.to_density(), t, samples)?;
    let read_rho = |rho: &DensityMatrix<T>, tk: T| -> CMat<T> {
        let phases = logical_phases(&p, tk);
        let reduced = p.embedding.adjoint() * rho.matrix() * &p.embedding;
        let mut out = CMat::zeros(n_reg, n_reg);
        for (r, &kr) in p.present.iter().enumerate() {
            for (c, &kc) in p.present.iter().enumerate() {
                out[(kr, kc)] = phases[r] * reduced[(r, c)] * phases[c].conj();
            }
        }
        out
    };
    if let Some(tgt) = target {
        let f = traj
            .densities()
            .expect("mixed trajectory")
            .iter()
            .zip(&traj.times)
            .map(|(rho, &tk)| tgt.dotc(&(read_rho(rho, tk) * tgt)).re)
            .collect();
        traj.fidelity_vs_target = Some(f);
    }
    let rho_l = read_rho(&traj.final_density().expect("at least one sample"), t);
    let leakage = T::one() - rho_l.trace().re;
    // Dominant eigenvector as a representative pure logical state.
    let eig = HermitianEigen::new(&rho_l);
    let top = eig.values.len() - 1;
    let logical = eig.vectors.column(top).into_owned() * crate::scalar::re(eig.values[top].max(T::zero()).sqrt());
    Ok(RegisterRun {
        logical,
        logical_density: Some(rho_l),
        trajectory: traj,
        leakage: leakage.max(lit(0.0)),
        simulated_dim: p.model.dim(),
        basis: p.model.basis.clone(),
    })
}
