//! Composite Hilbert spaces and the Hamiltonian variants of the driven
//! SQUID–cavity system.
//!
//! Basis ordering is SQUID I ⊗ SQUID II (⊗ SQUID III) ⊗ cavity, with each
//! SQUID's levels in the order |0⟩, |1⟩, |a⟩. Hamiltonians are stored as H/ħ
//! in rad/s.

use std::collections::HashMap;
use std::fmt;

use nalgebra::{Complex, DVector};
use serde::{Deserialize, Serialize};

use crate::coupling::{CavityParams, DriveParams, EffectiveParams};
use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::scalar::{cis, lit, re, CMat, CVec, Real};
use crate::spectrum::SpectrumResult;

/// Level labels inside one SQUID.
pub const LEVEL_0: u8 = 0;
pub const LEVEL_1: u8 = 1;
pub const LEVEL_A: u8 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Variant {
    /// Driven three-level SQUIDs and cavity in the static rotating frame.
    FullRotating,
    /// One SQUID after eliminating |a⟩ (Raman-coupled qubit and cavity).
    EffSingle,
    /// Two qubits with photon-number dependent Stark shifts and exchange.
    EffTwoPhoton,
    /// Two (or more) qubits, cavity in vacuum and traced out.
    EffTwoVacuum,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::FullRotating => "FULL_ROTATING",
            Variant::EffSingle => "EFF_SINGLE",
            Variant::EffTwoPhoton => "EFF_TWO_PHOTON",
            Variant::EffTwoVacuum => "EFF_TWO_VACUUM",
        }
    }

    pub fn is_effective(self) -> bool {
        !matches!(self, Variant::FullRotating)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One product basis state.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisState {
    pub levels: Vec<u8>,
    pub photons: usize,
}

impl BasisState {
    /// Σ_i σ_11,i + σ_aa,i + c†c (for two-level SQUIDs this reduces to Σσ_11 + c†c).
    pub fn excitations(&self) -> usize {
        self.photons + self.levels.iter().filter(|&&l| l != LEVEL_0).count()
    }

    /// Logical register index (SQUID I most significant) if every SQUID is in |0⟩ or |1⟩.
    pub fn logical_index(&self) -> Option<usize> {
        self.levels.iter().try_fold(0usize, |acc, &l| match l {
            LEVEL_0 | LEVEL_1 => Some(2 * acc + l as usize),
            _ => None,
        })
    }
}

/// Labelled (possibly truncated) product basis.
#[derive(Clone, Debug)]
pub struct Basis {
    n_squids: usize,
    levels_per_squid: usize,
    n_max: Option<usize>,
    states: Vec<BasisState>,
    index: HashMap<BasisState, usize>,
}

impl Basis {
    pub fn product(n_squids: usize, levels_per_squid: usize, n_max: Option<usize>) -> Self {
        let n_photon = n_max.map_or(1, |n| n + 1);
        let n_atoms = levels_per_squid.pow(n_squids as u32);
        let mut states = Vec::with_capacity(n_atoms * n_photon);
        for a in 0..n_atoms {
            let mut levels = vec![0u8; n_squids];
            let mut rest = a;
            for s in (0..n_squids).rev() {
                levels[s] = (rest % levels_per_squid) as u8;
                rest /= levels_per_squid;
            }
            for photons in 0..n_photon {
                states.push(BasisState { levels: levels.clone(), photons });
            }
        }
        Self::from_states(n_squids, levels_per_squid, n_max, states)
    }

    fn from_states(n_squids: usize, levels_per_squid: usize, n_max: Option<usize>, states: Vec<BasisState>) -> Self {
        let index = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        Self { n_squids, levels_per_squid, n_max, states, index }
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn n_squids(&self) -> usize {
        self.n_squids
    }

    pub fn levels_per_squid(&self) -> usize {
        self.levels_per_squid
    }

    pub fn n_max(&self) -> Option<usize> {
        self.n_max
    }

    pub fn has_cavity(&self) -> bool {
        self.n_max.is_some()
    }

    pub fn states(&self) -> &[BasisState] {
        &self.states
    }

    pub fn index_of(&self, state: &BasisState) -> Option<usize> {
        self.index.get(state).copied()
    }

    /// Index of the state with the given SQUID levels and photon number.
    pub fn find(&self, levels: &[u8], photons: usize) -> Option<usize> {
        self.index_of(&BasisState { levels: levels.to_vec(), photons })
    }

    /// Operator whose action on each basis state is given by `action`.
    /// Images outside the (possibly truncated) basis are dropped.
    pub fn operator<T: Real>(&self, action: impl Fn(&BasisState) -> Option<(BasisState, T)>) -> CMat<T> {
        let n = self.dim();
        let mut m = CMat::zeros(n, n);
        for (col, s) in self.states.iter().enumerate() {
            if let Some((image, amp)) = action(s) {
                if let Some(row) = self.index_of(&image) {
                    m[(row, col)] += re(amp);
                }
            }
        }
        m
    }

    /// Diagonal operator from a per-state real function.
    pub fn diagonal<T: Real>(&self, f: impl Fn(&BasisState) -> T) -> CMat<T> {
        let d = DVector::from_iterator(self.dim(), self.states.iter().map(|s| re(f(s))));
        CMat::from_diagonal(&d)
    }

    /// σ_ij = |i⟩⟨j| on `site`.
    pub fn sigma<T: Real>(&self, site: usize, i: u8, j: u8) -> CMat<T> {
        self.operator(|s| {
            (s.levels[site] == j).then(|| {
                let mut t = s.clone();
                t.levels[site] = i;
                (t, T::one())
            })
        })
    }

    /// Cavity annihilation operator c (zero without a cavity).
    pub fn annihilation<T: Real>(&self) -> CMat<T> {
        self.operator(|s| {
            (s.photons > 0).then(|| {
                let mut t = s.clone();
                t.photons -= 1;
                (t, lit::<T>(s.photons as f64).sqrt())
            })
        })
    }

    pub fn creation<T: Real>(&self) -> CMat<T> {
        self.annihilation::<T>().adjoint()
    }

    pub fn photon_number<T: Real>(&self) -> CMat<T> {
        self.diagonal(|s| lit(s.photons as f64))
    }

    /// Projector onto level `level` of `site`.
    pub fn level_projector<T: Real>(&self, site: usize, level: u8) -> CMat<T> {
        self.diagonal(|s| if s.levels[site] == level { T::one() } else { T::zero() })
    }

    /// Σ_i σ_aa,i.
    pub fn total_a_population<T: Real>(&self) -> CMat<T> {
        self.diagonal(|s| lit(s.levels.iter().filter(|&&l| l == LEVEL_A).count() as f64))
    }

    /// Conserved excitation number (photons + SQUIDs out of |0⟩).
    pub fn excitation_number<T: Real>(&self) -> CMat<T> {
        self.diagonal(|s| lit(s.excitations() as f64))
    }

    /// Basis index of a logical register state with the cavity in vacuum.
    pub fn logical_state_index(&self, register: usize) -> Option<usize> {
        let mut levels = vec![0u8; self.n_squids];
        let mut rest = register;
        for s in (0..self.n_squids).rev() {
            levels[s] = (rest % 2) as u8;
            rest /= 2;
        }
        (rest == 0).then_some(()).and_then(|_| self.find(&levels, 0))
    }

    fn restrict(&self, keep: &[usize]) -> Basis {
        let states = keep.iter().map(|&i| self.states[i].clone()).collect();
        Self::from_states(self.n_squids, self.levels_per_squid, self.n_max, states)
    }
}

/// Reference frame of a model.
///
/// `to_interaction[i] = (φ0, φ1, φa)` gives per-level offsets such that the
/// state in the interaction picture of the bare level energies is
/// `ψ_IP(t) = exp(+i t Σ_i φ_{level_i}) ψ_model(t)`.
/// `lab`, when present, maps lab-frame states into the model frame:
/// `ψ_model(t) = exp(+i t Λ) ψ_lab(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame<T> {
    pub to_interaction: Vec<[T; 3]>,
    pub lab: Option<LabFrame<T>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabFrame<T> {
    /// Per SQUID level rotation rates (0, ω_c - ω_μw, ω_c).
    pub level_rates: Vec<[T; 3]>,
    pub cavity_rate: T,
}

impl<T: Real> Frame<T> {
    fn identity(n_squids: usize) -> Self {
        Self { to_interaction: vec![[T::zero(); 3]; n_squids], lab: None }
    }

    fn offset(&self, s: &BasisState) -> T {
        s.levels
            .iter()
            .zip(&self.to_interaction)
            .fold(T::zero(), |acc, (&l, o)| acc + o[l as usize])
    }

    /// Diagonal of `exp(+i t Σ offsets)` over `basis`.
    pub fn interaction_phases(&self, basis: &Basis, t: T) -> CVec<T> {
        DVector::from_iterator(basis.dim(), basis.states().iter().map(|s| cis(self.offset(s) * t)))
    }

    /// Diagonal of `exp(+i t Λ)` (lab → model frame), if the frame is anchored to the lab.
    pub fn lab_phases(&self, basis: &Basis, t: T) -> Option<CVec<T>> {
        let lab = self.lab.as_ref()?;
        Some(DVector::from_iterator(
            basis.dim(),
            basis.states().iter().map(|s| {
                let rate = s
                    .levels
                    .iter()
                    .zip(&lab.level_rates)
                    .fold(lab.cavity_rate * lit(s.photons as f64), |acc, (&l, r)| acc + r[l as usize]);
                cis(rate * t)
            }),
        ))
    }
}

/// Static description of one driven SQUID for the full model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SquidChannel<T> {
    /// ω_a0 (rad/s).
    pub omega_a0: T,
    /// ω_a1 (rad/s).
    pub omega_a1: T,
    /// Cavity coupling of this SQUID (rad/s).
    pub g: T,
    pub drive: DriveParams<T>,
}

impl<T: Real> SquidChannel<T> {
    pub fn from_spectrum(spectrum: &SpectrumResult<T>, g: T, drive: DriveParams<T>) -> Self {
        Self { omega_a0: spectrum.omega_a0, omega_a1: spectrum.omega_a1, g, drive }
    }

    /// Level structure placing the cavity Δ_c below ω_a0 and the drive Δ_μw below ω_a1.
    pub fn from_effective(eff: &EffectiveParams<T>, omega_c: T, omega_uw: T) -> Self {
        Self {
            omega_a0: omega_c + eff.delta_c,
            omega_a1: omega_uw + eff.delta_uw,
            g: eff.g,
            drive: DriveParams { omega: eff.omega, omega_uw },
        }
    }

    pub fn omega_10(&self) -> T {
        self.omega_a0 - self.omega_a1
    }

    pub fn delta_c(&self, omega_c: T) -> T {
        self.omega_a0 - omega_c
    }

    /// δ = Δ_c - Δ_μw.
    pub fn delta(&self, omega_c: T) -> T {
        self.delta_c(omega_c) - (self.omega_a1 - self.drive.omega_uw)
    }
}

/// A Hamiltonian together with its basis, frame and provenance.
#[derive(Clone, Debug)]
pub struct SystemModel<T: Real> {
    pub basis: Basis,
    pub variant: Variant,
    /// H/ħ (rad/s).
    pub hamiltonian: CMat<T>,
    pub frame: Frame<T>,
    pub warnings: Vec<String>,
}

impl<T: Real> SystemModel<T> {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn n_squids(&self) -> usize {
        self.basis.n_squids()
    }

    /// `max|H - H†| / max|H|`.
    pub fn hermiticity_defect(&self) -> T {
        linalg::hermiticity_defect(&self.hamiltonian)
    }

    pub fn excitation_number(&self) -> CMat<T> {
        self.basis.excitation_number()
    }

    /// Submodel on all basis states with at most `max_excitations` excitations.
    /// The subspace is invariant under the Hamiltonian (excitations are
    /// conserved) and under decay channels that only lower the excitation number.
    pub fn restrict_to_excitations(&self, max_excitations: usize) -> SystemModel<T> {
        let keep: Vec<usize> = (0..self.dim())
            .filter(|&i| self.basis.states()[i].excitations() <= max_excitations)
            .collect();
        let n = keep.len();
        let hamiltonian = CMat::from_fn(n, n, |r, c| self.hamiltonian[(keep[r], keep[c])]);
        SystemModel {
            basis: self.basis.restrict(&keep),
            variant: self.variant,
            hamiltonian,
            frame: self.frame.clone(),
            warnings: self.warnings.clone(),
        }
    }

    /// Embeds a logical register amplitude vector (2ⁿ entries, SQUID I most
    /// significant) into the model basis with the cavity in vacuum.
    pub fn embed_logical(&self, logical: &CVec<T>) -> Result<CVec<T>> {
        let n_reg = 1usize << self.n_squids();
        if logical.len() != n_reg {
            return Err(Error::DimensionMismatch { expected: n_reg, actual: logical.len() });
        }
        let mut psi = CVec::zeros(self.dim());
        for (k, &a) in logical.iter().enumerate() {
            let idx = self.basis.logical_state_index(k).ok_or_else(|| {
                invalid("basis", format!("logical state {k} missing from the model basis"))
            })?;
            psi[idx] = a;
        }
        Ok(psi)
    }

    /// Columns are the embedded logical basis states.
    pub fn logical_embedding(&self) -> Result<CMat<T>> {
        let n_reg = 1usize << self.n_squids();
        let mut b = CMat::zeros(self.dim(), n_reg);
        for k in 0..n_reg {
            let idx = self.basis.logical_state_index(k).ok_or_else(|| {
                invalid("basis", format!("logical state {k} missing from the model basis"))
            })?;
            b[(idx, k)] = re(T::one());
        }
        Ok(b)
    }
}

/// Builds the time-independent rotating-frame Hamiltonian
/// `Σ_i [Δ_c,i σ_aa,i + δ_i σ_11,i + g_i (c†σ_0a,i + h.c.) + Ω_i (σ_a1,i + h.c.)]`.
pub fn build_full_rotating<T: Real>(
    squids: &[SquidChannel<T>],
    cavity: &CavityParams<T>,
) -> Result<SystemModel<T>> {
    cavity.validate()?;
    if squids.is_empty() || squids.len() > 3 {
        return Err(invalid("n_squids", "between 1 and 3 SQUIDs are supported"));
    }
    for s in squids {
        s.drive.validate()?;
        if !(s.g >= T::zero()) {
            return Err(invalid("g", "must be >= 0"));
        }
    }
    let mut warnings = Vec::new();
    if cavity.n_max < 3 {
        let w = format!("Fock truncation n_max = {} < 3 may bias photon-mediated dynamics", cavity.n_max);
        log::warn!("{w}");
        warnings.push(w);
    }
    let basis = Basis::product(squids.len(), 3, Some(cavity.n_max));
    let c = basis.annihilation::<T>();
    let cd = c.adjoint();
    let n = basis.dim();
    let mut h = CMat::<T>::zeros(n, n);
    let mut to_interaction = Vec::new();
    let mut level_rates = Vec::new();
    for (i, s) in squids.iter().enumerate() {
        let delta_c = s.delta_c(cavity.omega_c);
        let delta = s.delta(cavity.omega_c);
        h += basis.level_projector::<T>(i, LEVEL_A) * re(delta_c);
        h += basis.level_projector::<T>(i, LEVEL_1) * re(delta);
        let cav = &cd * basis.sigma::<T>(i, LEVEL_0, LEVEL_A) * re(s.g);
        h += &cav + cav.adjoint();
        let drv = basis.sigma::<T>(i, LEVEL_A, LEVEL_1) * re(s.drive.omega);
        h += &drv + drv.adjoint();
        to_interaction.push([T::zero(), delta, delta_c]);
        level_rates.push([T::zero(), cavity.omega_c - s.drive.omega_uw, cavity.omega_c]);
    }
    Ok(SystemModel {
        basis,
        variant: Variant::FullRotating,
        hamiltonian: h,
        frame: Frame {
            to_interaction,
            lab: Some(LabFrame { level_rates, cavity_rate: cavity.omega_c }),
        },
        warnings,
    })
}

/// Builds one of the effective Hamiltonians for identical SQUIDs.
pub fn build_effective<T: Real>(
    variant: Variant,
    eff: &EffectiveParams<T>,
    n_max: usize,
) -> Result<SystemModel<T>> {
    match variant {
        Variant::EffSingle => build_eff_single(eff, n_max),
        Variant::EffTwoPhoton => build_eff_two_photon(eff, n_max),
        Variant::EffTwoVacuum => build_eff_vacuum(&[*eff, *eff], 2, (0, 1)),
        Variant::FullRotating => Err(Error::VariantMismatch {
            variant: variant.name(),
            reason: "build_effective (use build_full_rotating)".into(),
        }),
    }
}

/// Single SQUID after adiabatic elimination, in the frame where the Raman
/// phase e^{±iδt} is absorbed as an offset δ on |1⟩:
/// `-(g²/Δ_c) c†c σ_00 + (δ - Ω²/Δ_μw) σ_11 - g_eff (c σ_10 + c† σ_01)`.
fn build_eff_single<T: Real>(eff: &EffectiveParams<T>, n_max: usize) -> Result<SystemModel<T>> {
    if n_max < 1 {
        return Err(invalid("n_max", "must be >= 1"));
    }
    let basis = Basis::product(1, 2, Some(n_max));
    let c = basis.annihilation::<T>();
    let cd = c.adjoint();
    let p0 = basis.level_projector::<T>(0, LEVEL_0);
    let p1 = basis.level_projector::<T>(0, LEVEL_1);
    let s10 = basis.sigma::<T>(0, LEVEL_1, LEVEL_0);
    let s01 = basis.sigma::<T>(0, LEVEL_0, LEVEL_1);
    let nph = basis.photon_number::<T>();
    let h = &nph * &p0 * re(-eff.cavity_stark_shift())
        + &p1 * re(eff.delta - eff.drive_stark_shift())
        - (&c * &s10 + &cd * &s01) * re(eff.g_eff);
    Ok(SystemModel {
        basis,
        variant: Variant::EffSingle,
        hamiltonian: h,
        frame: Frame { to_interaction: vec![[T::zero(), eff.delta, T::zero()]], lab: None },
        warnings: Vec::new(),
    })
}

/// Two identical SQUIDs with photon-number dependent Stark shifts:
/// `Σ_i [-(g²/Δ_c) c†c σ_00,i - (Ω²/Δ_μw) σ_11,i]
///  + γ [Σ_i (-c†c σ_00,i + c c† σ_11,i) + σ_10,I σ_01,II + σ_01,I σ_10,II]`.
fn build_eff_two_photon<T: Real>(eff: &EffectiveParams<T>, n_max: usize) -> Result<SystemModel<T>> {
    if n_max < 1 {
        return Err(invalid("n_max", "must be >= 1"));
    }
    let basis = Basis::product(2, 2, Some(n_max));
    let nph = basis.photon_number::<T>();
    let ident = linalg::identity::<T>(basis.dim());
    let ccd = &nph + &ident;
    let mut h = CMat::<T>::zeros(basis.dim(), basis.dim());
    for i in 0..2 {
        let p0 = basis.level_projector::<T>(i, LEVEL_0);
        let p1 = basis.level_projector::<T>(i, LEVEL_1);
        h += &nph * &p0 * re(-eff.cavity_stark_shift() - eff.gamma);
        h += &p1 * re(-eff.drive_stark_shift());
        h += &ccd * &p1 * re(eff.gamma);
    }
    h += flip_flop(&basis, 0, 1) * re(eff.gamma);
    Ok(SystemModel {
        basis,
        variant: Variant::EffTwoPhoton,
        hamiltonian: h,
        frame: Frame::identity(2),
        warnings: Vec::new(),
    })
}

/// σ_10,p σ_01,q + σ_01,p σ_10,q.
fn flip_flop<T: Real>(basis: &Basis, p: usize, q: usize) -> CMat<T> {
    let up_p = basis.sigma::<T>(p, LEVEL_1, LEVEL_0);
    let up_q = basis.sigma::<T>(q, LEVEL_1, LEVEL_0);
    let x = &up_p * up_q.adjoint();
    &x + x.adjoint()
}

/// Vacuum-sector effective Hamiltonian for qubits `pair` out of `n_qubits`; the
/// remaining qubits are undriven (Ω = 0) and therefore idle.
///
/// `effs[k]` belongs to `pair.k`; both must share δ. The exchange rate is
/// g_eff,p g_eff,q / δ, reducing to γ for identical SQUIDs.
pub fn build_eff_vacuum<T: Real>(
    effs: &[EffectiveParams<T>; 2],
    n_qubits: usize,
    pair: (usize, usize),
) -> Result<SystemModel<T>> {
    if !(2..=3).contains(&n_qubits) {
        return Err(invalid("n_qubits", "2 or 3 qubits are supported"));
    }
    if pair.0 == pair.1 || pair.0 >= n_qubits || pair.1 >= n_qubits {
        return Err(invalid("pair", "must name two distinct qubits"));
    }
    let (d0, d1) = (effs[0].delta, effs[1].delta);
    let tol: T = lit(1e-12);
    if (d0 - d1).abs() > tol * d0.abs().max(d1.abs()) {
        return Err(invalid("delta", "paired SQUIDs need matched delta (see matched_drive_frequency)"));
    }
    let basis = Basis::product(n_qubits, 2, None);
    let mut h = CMat::<T>::zeros(basis.dim(), basis.dim());
    for (k, &site) in [pair.0, pair.1].iter().enumerate() {
        h += basis.level_projector::<T>(site, LEVEL_1) * re(effs[k].gamma_prime);
    }
    let exchange = effs[0].g_eff * effs[1].g_eff / d0;
    h += flip_flop(&basis, pair.0, pair.1) * re(exchange);
    Ok(SystemModel {
        basis,
        variant: Variant::EffTwoVacuum,
        hamiltonian: h,
        frame: Frame::identity(n_qubits),
        warnings: Vec::new(),
    })
}

/// Time-dependent lab-frame Hamiltonian
/// `H(t) = Σ_i [ω_10 σ_11 + ω_a0 σ_aa] + ω_c c†c + Σ_i g_i(c†σ_0a,i + h.c.)
///        + Σ_i Ω_i (e^{iω_μw t} σ_1a,i + h.c.)` (energies relative to E_0).
#[derive(Clone, Debug)]
pub struct LabHamiltonian<T: Real> {
    pub basis: Basis,
    pub static_part: CMat<T>,
    /// (Ω_i σ_1a,i, ω_μw,i).
    pub drives: Vec<(CMat<T>, T)>,
}

impl<T: Real> LabHamiltonian<T> {
    pub fn new(squids: &[SquidChannel<T>], cavity: &CavityParams<T>) -> Result<Self> {
        cavity.validate()?;
        if squids.is_empty() || squids.len() > 3 {
            return Err(invalid("n_squids", "between 1 and 3 SQUIDs are supported"));
        }
        let basis = Basis::product(squids.len(), 3, Some(cavity.n_max));
        let cd = basis.creation::<T>();
        let mut h = basis.photon_number::<T>() * re(cavity.omega_c);
        let mut drives = Vec::new();
        for (i, s) in squids.iter().enumerate() {
            s.drive.validate()?;
            h += basis.level_projector::<T>(i, LEVEL_1) * re(s.omega_10());
            h += basis.level_projector::<T>(i, LEVEL_A) * re(s.omega_a0);
            let cav = &cd * basis.sigma::<T>(i, LEVEL_0, LEVEL_A) * re(s.g);
            h += &cav + cav.adjoint();
            drives.push((basis.sigma::<T>(i, LEVEL_1, LEVEL_A) * re(s.drive.omega), s.drive.omega_uw));
        }
        Ok(Self { basis, static_part: h, drives })
    }

    pub fn at(&self, t: T) -> CMat<T> {
        let mut h = self.static_part.clone();
        for (op, w) in &self.drives {
            let term = op * cis(*w * t);
            h += &term + term.adjoint();
        }
        h
    }

    /// `-i H(t) ψ`.
    pub fn derivative(&self, t: T, psi: &CVec<T>) -> CVec<T> {
        let mut out = &self.static_part * psi;
        for (op, w) in &self.drives {
            let ph = cis(*w * t);
            out += (op * psi) * ph;
            out += (op.ad_mul(psi)) * ph.conj();
        }
        out * Complex::new(T::zero(), -T::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, max_abs};

    fn nominal_channels(n: usize) -> (Vec<SquidChannel<f64>>, CavityParams<f64>) {
        let eff = EffectiveParams::<f64>::nominal();
        let omega_c = crate::constants::ghz_to_rad_per_s(29.7);
        let omega_uw = crate::constants::ghz_to_rad_per_s(20.0);
        let ch = SquidChannel::from_effective(&eff, omega_c, omega_uw);
        (vec![ch; n], CavityParams { omega_c, g: eff.g, n_max: 5, quality_factor: Some(2e4) })
    }

    #[test]
    fn basis_ordering_is_squid_major_then_cavity() {
        let b = Basis::product(2, 3, Some(1));
        assert_eq!(b.dim(), 18);
        assert_eq!(b.states()[0], BasisState { levels: vec![0, 0], photons: 0 });
        assert_eq!(b.states()[1], BasisState { levels: vec![0, 0], photons: 1 });
        assert_eq!(b.states()[2], BasisState { levels: vec![0, 1], photons: 0 });
        assert_eq!(b.states()[6], BasisState { levels: vec![1, 0], photons: 0 });
        assert_eq!(b.logical_state_index(1), Some(2));
        assert_eq!(b.logical_state_index(2), Some(6));
    }

    #[test]
    fn uncoupled_full_model_is_diagonal() {
        let (mut ch, mut cav) = nominal_channels(1);
        ch[0].g = 0.0;
        ch[0].drive.omega = 0.0;
        cav.g = 0.0;
        let m = build_full_rotating(&ch, &cav).unwrap();
        let delta = ch[0].delta(cav.omega_c);
        let delta_c = ch[0].delta_c(cav.omega_c);
        for (i, s) in m.basis.states().iter().enumerate() {
            let expect = [0.0, delta, delta_c][s.levels[0] as usize];
            assert_eq!(m.hamiltonian[(i, i)].re, expect);
            for j in 0..m.dim() {
                if i != j {
                    assert_eq!(m.hamiltonian[(i, j)].norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn full_single_squid_conserves_excitations() {
        let (ch, mut cav) = nominal_channels(1);
        cav.n_max = 1;
        let m = build_full_rotating(&ch, &cav).unwrap();
        assert!(!m.warnings.is_empty());
        let comm = commutator(&m.hamiltonian, &m.excitation_number());
        assert!(max_abs(&comm) <= 1e-12 * max_abs(&m.hamiltonian));
    }

    #[test]
    fn undriven_level_one_decouples() {
        let (mut ch, cav) = nominal_channels(2);
        for c in &mut ch {
            c.drive.omega = 0.0;
        }
        let m = build_full_rotating(&ch, &cav).unwrap();
        for (i, si) in m.basis.states().iter().enumerate() {
            for (j, sj) in m.basis.states().iter().enumerate() {
                if i != j && (si.levels.contains(&LEVEL_1) || sj.levels.contains(&LEVEL_1)) {
                    // the only surviving couplings touching |1⟩ keep that SQUID in |1⟩
                    let same_ones = si.levels.iter().zip(&sj.levels).all(|(a, b)| (*a == 1) == (*b == 1));
                    if !same_ones {
                        assert_eq!(m.hamiltonian[(i, j)].norm(), 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn two_vacuum_matrix_matches_transcription() {
        let eff = EffectiveParams::<f64>::nominal();
        let m = build_effective(Variant::EffTwoVacuum, &eff, 5).unwrap();
        let (g, gp) = (eff.gamma, eff.gamma_prime);
        let expected = [
            [0.0, 0.0, 0.0, 0.0],
            [0.0, gp, g, 0.0],
            [0.0, g, gp, 0.0],
            [0.0, 0.0, 0.0, 2.0 * gp],
        ];
        for (r, row) in expected.iter().enumerate() {
            for (c, &x) in row.iter().enumerate() {
                assert!((m.hamiltonian[(r, c)] - re(x)).norm() <= 1e-9 * g.abs());
            }
        }
    }

    #[test]
    fn two_photon_vacuum_sector_equals_two_vacuum() {
        let eff = EffectiveParams::<f64>::from_detunings(2.0e8, 1.4e8, 2.2e9, 1.3e9).unwrap();
        let tp = build_effective(Variant::EffTwoPhoton, &eff, 3).unwrap();
        let vac = build_effective(Variant::EffTwoVacuum, &eff, 3).unwrap();
        let idx: Vec<usize> = (0..4).map(|k| tp.basis.logical_state_index(k).unwrap()).collect();
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(tp.hamiltonian[(idx[r], idx[c])], vac.hamiltonian[(r, c)]);
            }
        }
    }

    #[test]
    fn effective_variants_conserve_their_numbers() {
        let eff = EffectiveParams::<f64>::nominal();
        for v in [Variant::EffSingle, Variant::EffTwoPhoton, Variant::EffTwoVacuum] {
            let m = build_effective(v, &eff, 4).unwrap();
            assert!(m.hermiticity_defect() < 1e-12);
            let comm = commutator(&m.hamiltonian, &m.excitation_number());
            assert!(max_abs(&comm) <= 1e-12 * max_abs(&m.hamiltonian), "{v}");
        }
    }

    #[test]
    fn build_effective_rejects_full_variant() {
        let eff = EffectiveParams::<f64>::nominal();
        assert!(matches!(
            build_effective(Variant::FullRotating, &eff, 5),
            Err(Error::VariantMismatch { .. })
        ));
    }

    #[test]
    fn restriction_keeps_low_excitation_block() {
        let (ch, cav) = nominal_channels(2);
        let m = build_full_rotating(&ch, &cav).unwrap();
        assert_eq!(m.dim(), 54);
        let r = m.restrict_to_excitations(1);
        assert_eq!(r.dim(), 6);
        assert!(r.basis.states().iter().all(|s| s.excitations() <= 1));
        assert!(r.logical_embedding().is_err() || r.basis.logical_state_index(3).is_none());
    }

    #[test]
    fn lab_hamiltonian_is_hermitian() {
        let (ch, mut cav) = nominal_channels(2);
        cav.n_max = 2;
        let lab = LabHamiltonian::new(&ch, &cav).unwrap();
        for t in [0.0, 1.3e-9, 7.7e-8] {
            assert!(linalg::hermiticity_defect(&lab.at(t)) < 1e-14);
        }
    }
}
