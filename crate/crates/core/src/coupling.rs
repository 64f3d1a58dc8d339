//! Cavity and microwave coupling constants and the derived dispersive
//! parameters (δ, g_eff, γ, γ′, χ) that set every protocol timing.

use serde::{Deserialize, Serialize};

use crate::constants::{HBAR, MU_0};
use crate::error::{invalid, Error, Result};
use crate::scalar::{lit, to_f64, Real};
use crate::spectrum::{SpectrumResult, SquidParams};

/// Ratio below which a detuning/coupling pair is flagged as outside the
/// dispersive regime.
pub const DISPERSIVE_FLAG_RATIO: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CavityParams<T> {
    /// Mode angular frequency ω_c (rad/s).
    pub omega_c: T,
    /// Cavity coupling g (rad/s), real and nonnegative.
    pub g: T,
    /// Fock truncation: photon numbers 0..=n_max are kept.
    pub n_max: usize,
    /// Quality factor Q_c.
    pub quality_factor: Option<T>,
}

impl<T: Real> CavityParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_c > T::zero()) {
            return Err(invalid("omega_c", "must be > 0"));
        }
        if !(self.g >= T::zero()) {
            return Err(invalid("g", "must be real and >= 0"));
        }
        if self.n_max < 1 {
            return Err(invalid("n_max", "must be >= 1"));
        }
        if let Some(q) = self.quality_factor {
            if !(q > T::zero()) {
                return Err(invalid("quality_factor", "must be > 0"));
            }
        }
        Ok(())
    }

    /// Photon decay rate κ = ω_c / Q_c (s⁻¹).
    pub fn kappa(&self) -> Option<T> {
        self.quality_factor.map(|q| self.omega_c / q)
    }
}

/// Classical microwave drive on the |1⟩ ↔ |a⟩ transition of one SQUID.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveParams<T> {
    /// Rabi frequency Ω (rad/s).
    pub omega: T,
    /// Carrier angular frequency ω_μw (rad/s).
    pub omega_uw: T,
}

impl<T: Real> DriveParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega >= T::zero()) {
            return Err(invalid("Omega", "must be >= 0"));
        }
        if !(self.omega_uw > T::zero()) {
            return Err(invalid("omega_uw", "must be > 0"));
        }
        Ok(())
    }
}

/// Surface integrals of the cavity and microwave magnetic fields over the SQUID loop.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingInputs<T> {
    /// ∫ B_c · dS (T m²).
    pub cavity_field_integral: T,
    /// ∫ B_μw · dS (T m²).
    pub microwave_field_integral: T,
}

impl<T: Real> CouplingInputs<T> {
    fn validate(&self) -> Result<()> {
        let ok = |x: T| x.is_finite() && x >= T::zero();
        if !ok(self.cavity_field_integral) {
            return Err(invalid("cavity_field_integral", "must be finite and >= 0"));
        }
        if !ok(self.microwave_field_integral) {
            return Err(invalid("microwave_field_integral", "must be finite and >= 0"));
        }
        Ok(())
    }
}

fn cavity_prefactor<T: Real>(omega_c: T, inductance: T) -> T {
    // (1/L) sqrt(ω_c / (2 μ₀ ħ)); split so that f32 does not overflow.
    let inv_sqrt: T = lit((1.0 / (2.0 * MU_0 * HBAR)).sqrt());
    omega_c.sqrt() * inv_sqrt / inductance
}

/// g = (1/L) √(ω_c / 2μ₀ħ) ⟨0|Φ|a⟩ ∫B_c·dS.
pub fn coupling_g<T: Real>(
    spectrum: &SpectrumResult<T>,
    inputs: &CouplingInputs<T>,
    cavity: &CavityParams<T>,
    squid: &SquidParams<T>,
) -> Result<T> {
    inputs.validate()?;
    squid.validate()?;
    if !(cavity.omega_c > T::zero()) {
        return Err(invalid("omega_c", "must be > 0"));
    }
    Ok(cavity_prefactor(cavity.omega_c, squid.inductance)
        * spectrum.flux_0a()
        * inputs.cavity_field_integral)
}

/// Cavity field integral that yields coupling `g_target`.
pub fn cavity_field_for_g<T: Real>(
    spectrum: &SpectrumResult<T>,
    g_target: T,
    omega_c: T,
    squid: &SquidParams<T>,
) -> T {
    g_target / (cavity_prefactor(omega_c, squid.inductance) * spectrum.flux_0a())
}

fn drive_prefactor<T: Real>(inductance: T) -> T {
    lit::<T>(1.0 / (2.0 * HBAR)) / inductance
}

/// Ω = (1/2Lħ) ⟨1|Φ|a⟩ ∫B_μw·dS.
pub fn rabi_omega<T: Real>(
    spectrum: &SpectrumResult<T>,
    inputs: &CouplingInputs<T>,
    squid: &SquidParams<T>,
) -> Result<T> {
    inputs.validate()?;
    squid.validate()?;
    Ok(drive_prefactor(squid.inductance) * spectrum.flux_1a() * inputs.microwave_field_integral)
}

/// Microwave field integral that yields Rabi frequency `omega_target`.
pub fn microwave_field_for_omega<T: Real>(
    spectrum: &SpectrumResult<T>,
    omega_target: T,
    squid: &SquidParams<T>,
) -> T {
    omega_target / (drive_prefactor(squid.inductance) * spectrum.flux_1a())
}

/// Flags raised when a coupling is not small against its detuning.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct ValidityFlags {
    pub cavity_detuning_small: bool,
    pub drive_detuning_small: bool,
    pub raman_detuning_small: bool,
    /// γ = 0, so χ = γ′/γ is undefined.
    pub chi_undefined: bool,
}

impl ValidityFlags {
    pub fn any(&self) -> bool {
        self.cavity_detuning_small || self.drive_detuning_small || self.raman_detuning_small || self.chi_undefined
    }
}

/// Dispersive parameters of one SQUID (all rates in rad/s).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams<T> {
    pub g: T,
    pub omega: T,
    /// Δ_c = ω_a0 - ω_c.
    pub delta_c: T,
    /// Δ_μw = ω_a1 - ω_μw.
    pub delta_uw: T,
    /// δ = Δ_c - Δ_μw.
    pub delta: T,
    /// g_eff = (Ω g / 2)(1/Δ_c + 1/Δ_μw).
    pub g_eff: T,
    /// γ = g_eff² / δ.
    pub gamma: T,
    /// γ′ = γ - Ω²/Δ_μw.
    pub gamma_prime: T,
    /// χ = γ′/γ, `None` when γ = 0.
    pub chi: Option<T>,
    pub flags: ValidityFlags,
}

impl<T: Real> EffectiveParams<T> {
    /// Derives every parameter from couplings and detunings.
    pub fn from_detunings(g: T, omega: T, delta_c: T, delta_uw: T) -> Result<Self> {
        if !(g >= T::zero()) {
            return Err(invalid("g", "must be >= 0"));
        }
        if !(omega >= T::zero()) {
            return Err(invalid("Omega", "must be >= 0"));
        }
        if !(delta_c > T::zero()) {
            return Err(invalid("Delta_c", "cavity detuning must be > 0"));
        }
        if !(delta_uw > T::zero()) {
            return Err(invalid("Delta_uw", "microwave detuning must be > 0"));
        }
        let delta = delta_c - delta_uw;
        if delta == T::zero() {
            return Err(Error::DegenerateDetuning);
        }
        let two: T = lit(2.0);
        let g_eff = omega * g / two * (T::one() / delta_c + T::one() / delta_uw);
        let gamma = g_eff * g_eff / delta;
        let stark_1 = omega * omega / delta_uw;
        let gamma_prime = gamma - stark_1;
        let chi = if gamma != T::zero() { Some(gamma_prime / gamma) } else { None };
        let r: T = lit(DISPERSIVE_FLAG_RATIO);
        let flags = ValidityFlags {
            cavity_detuning_small: delta_c < r * g,
            drive_detuning_small: delta_uw < r * omega,
            raman_detuning_small: delta.abs() < r * g_eff,
            chi_undefined: chi.is_none(),
        };
        Ok(Self { g, omega, delta_c, delta_uw, delta, g_eff, gamma, gamma_prime, chi, flags })
    }

    /// Couplings g = 1.8×10⁸ s⁻¹, g = 1.2 Ω, Δ_c = 10 g, Δ_μw = 10 Ω.
    pub fn nominal() -> Self {
        Self::with_ratio(10.0)
    }

    /// Nominal couplings with both detunings set to `ratio` times their coupling.
    pub fn with_ratio(ratio: f64) -> Self {
        let g: T = lit(1.8e8);
        let omega = g / lit(1.2);
        let r: T = lit(ratio);
        Self::from_detunings(g, omega, r * g, r * omega).expect("preset is valid")
    }

    /// ac-Stark shift of |1⟩ from the microwave, Ω²/Δ_μw.
    pub fn drive_stark_shift(&self) -> T {
        self.omega * self.omega / self.delta_uw
    }

    /// Cavity-induced Stark shift per photon on |0⟩, g²/Δ_c.
    pub fn cavity_stark_shift(&self) -> T {
        self.g * self.g / self.delta_c
    }

    pub fn chi_or_err(&self) -> Result<T> {
        self.chi.ok_or(Error::InvalidParameter {
            name: "gamma",
            reason: "gamma = 0 (no drive), chi = gamma'/gamma undefined".into(),
        })
    }

    /// g_eff implied by reading δ = `ratio` · g_eff literally.
    pub fn g_eff_implied_by_ratio(&self, ratio: f64) -> T {
        self.delta.abs() / lit(ratio)
    }

    /// Ratios Δ_c/g, Δ_μw/Ω, δ/g_eff.
    pub fn validity_ratios(&self) -> [f64; 3] {
        let q = |a: T, b: T| if b == T::zero() { f64::INFINITY } else { to_f64(a / b) };
        [q(self.delta_c, self.g), q(self.delta_uw, self.omega), q(self.delta, self.g_eff)]
    }
}

/// Computes the dispersive parameters of one SQUID from its spectrum, the
/// cavity and its drive.
pub fn effective_params<T: Real>(
    spectrum: &SpectrumResult<T>,
    cavity: &CavityParams<T>,
    drive: &DriveParams<T>,
) -> Result<EffectiveParams<T>> {
    cavity.validate()?;
    drive.validate()?;
    let delta_c = spectrum.omega_a0 - cavity.omega_c;
    let delta_uw = spectrum.omega_a1 - drive.omega_uw;
    EffectiveParams::from_detunings(cavity.g, drive.omega, delta_c, delta_uw)
}

/// Microwave frequency for a second SQUID that makes its δ equal `target_delta`:
/// ω_μw = ω_c + δ - ω_a0 + ω_a1.
pub fn matched_drive_frequency<T: Real>(
    spectrum: &SpectrumResult<T>,
    omega_c: T,
    target_delta: T,
) -> T {
    omega_c + target_delta - spectrum.omega_a0 + spectrum.omega_a1
}
