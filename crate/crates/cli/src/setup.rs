//! Physical setup derived from a config: spectra, couplings, detunings,
//! effective parameters and system models.

use serde::Serialize;
use squidcav_core::constants::{ghz_to_rad_per_s, rad_per_s_to_ghz};
use squidcav_core::coupling::{coupling_g, CouplingInputs, ValidityFlags};
use squidcav_core::feasibility::{t1_from_resistance, STATED_DELTA_OVER_G_EFF};
use squidcav_core::model::{build_eff_vacuum, build_effective, build_full_rotating, Variant};
use squidcav_core::spectrum::{solve_squid_spectrum_with, ConvergenceInfo, GridConfig, LambdaCheck, LevelMap};
use squidcav_core::{
    CavityParams, Decoherence, EffectiveParams, RunOptions, SpectrumResult, SquidChannel, SquidParams, SystemModel,
};

use crate::config::{ExperimentConfig, SquidSection, NOMINAL_OMEGA_UW_GHZ};
use crate::error::{CliError, CliResult, Context};

/// Serializable view of one solved spectrum.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct SpectrumSummary {
    pub squid: usize,
    pub levels_GHz: Vec<f64>,
    pub level_map: LevelMap,
    pub omega_a0_GHz: f64,
    pub omega_a1_GHz: f64,
    pub omega_10_GHz: f64,
    /// ⟨i|Φ|j⟩ (Wb) over (|0⟩, |1⟩, |a⟩).
    pub flux_elements_Wb: [[f64; 3]; 3],
    pub lambda_check: LambdaCheck,
    pub convergence: ConvergenceInfo,
}

impl SpectrumSummary {
    pub fn new(squid: usize, s: &SpectrumResult) -> Self {
        Self {
            squid,
            levels_GHz: (0..s.energies.len()).map(|i| s.level_ghz(i)).collect(),
            level_map: s.level_map,
            omega_a0_GHz: rad_per_s_to_ghz(s.omega_a0),
            omega_a1_GHz: rad_per_s_to_ghz(s.omega_a1),
            omega_10_GHz: rad_per_s_to_ghz(s.omega_10),
            flux_elements_Wb: s.flux_elements,
            lambda_check: s.lambda_check.clone(),
            convergence: s.convergence.clone(),
        }
    }
}

/// Derived parameters of one SQUID, as recorded in results.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SquidSetup {
    pub effective: EffectiveParams,
    /// g_eff implied by reading δ = 10 g_eff literally.
    pub g_eff_stated: f64,
    /// Drive carrier ω_μw (rad/s).
    pub omega_uw: f64,
    /// Where Δ_c came from: `given`, `ratio` or `spectrum`.
    pub delta_c_source: &'static str,
    pub delta_uw_source: &'static str,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Setup {
    /// ω_c (rad/s).
    pub omega_c: f64,
    pub squids: Vec<SquidSetup>,
    pub spectra: Vec<SpectrumSummary>,
    pub warnings: Vec<String>,
}

pub fn squid_params(s: &SquidSection, pointer: &str) -> CliResult<SquidParams> {
    SquidParams::from_lab_units(s.c_ff, s.l_ph, s.ic_ua, s.phix_phi0).context(|| pointer.to_string())
}

pub fn grid_config(cfg: &ExperimentConfig) -> GridConfig {
    GridConfig {
        num_points: cfg.grid.points,
        halfwidth: cfg.grid.halfwidth_phi0,
        levels: cfg.grid.levels,
        check_convergence: cfg.grid.check_convergence,
        ..GridConfig::default()
    }
}

fn squid_pointer(cfg: &ExperimentConfig, k: usize) -> String {
    if cfg.squids.is_some() {
        format!("/squids/{k}")
    } else {
        "/squid".into()
    }
}

/// Solves the spectrum of SQUID `k`.
pub fn solve_spectrum(cfg: &ExperimentConfig, k: usize) -> CliResult<SpectrumResult> {
    let pointer = squid_pointer(cfg, k);
    let s = cfg.squid(k);
    let params = squid_params(s, &pointer)?;
    solve_squid_spectrum_with(&params, &grid_config(cfg), s.a_index).context(|| format!("spectrum of {pointer}"))
}

fn needs_spectrum(cfg: &ExperimentConfig, k: usize) -> bool {
    let d = cfg.drive(k);
    cfg.coupling.is_some()
        || (cfg.cavity.delta_c_per_s.is_none() && cfg.cavity.delta_c_over_g.is_none())
        || d.omega_uw_ghz.is_some()
}

fn flag_warning(k: usize, f: &ValidityFlags) -> Option<String> {
    if !f.any() {
        return None;
    }
    let mut raised = Vec::new();
    if f.cavity_detuning_small {
        raised.push("Delta_c < 5 g");
    }
    if f.drive_detuning_small {
        raised.push("Delta_uw < 5 Omega");
    }
    if f.raman_detuning_small {
        raised.push("|delta| < 5 g_eff");
    }
    if f.chi_undefined {
        raised.push("gamma = 0");
    }
    Some(format!("SQUID {}: outside the dispersive regime ({})", k + 1, raised.join(", ")))
}

impl Setup {
    /// Derives `n` SQUIDs; spectra are solved only where a quantity needs one.
    pub fn resolve(cfg: &ExperimentConfig, n: usize) -> CliResult<Self> {
        let omega_c = ghz_to_rad_per_s(cfg.cavity.omega_c_ghz);
        let mut squids = Vec::with_capacity(n);
        let mut spectra: Vec<(SquidSection, SpectrumResult)> = Vec::new();
        let mut summaries = Vec::new();
        let mut warnings = Vec::new();
        for k in 0..n {
            let spectrum = if needs_spectrum(cfg, k) {
                let dev = cfg.squid(k).clone();
                let idx = match spectra.iter().position(|(d, _)| *d == dev) {
                    Some(i) => i,
                    None => {
                        let s = solve_spectrum(cfg, k)?;
                        if !s.lambda_check.valid {
                            warnings.push(format!("SQUID {}: level map is not a Lambda configuration", k + 1));
                        }
                        spectra.push((dev, s));
                        spectra.len() - 1
                    }
                };
                summaries.push(SpectrumSummary::new(k, &spectra[idx].1));
                Some(&spectra[idx].1)
            } else {
                None
            };
            let g = match (cfg.cavity.g_per_s, &cfg.coupling) {
                (Some(g), _) => g,
                (None, Some(c)) => {
                    let spectrum = spectrum.expect("coupling requires a spectrum");
                    let inputs = CouplingInputs { cavity_field_integral: c.bc_integral_tm2, microwave_field_integral: 0.0 };
                    let cav = CavityParams { omega_c, g: 0.0, n_max: cfg.cavity.n_max, quality_factor: None };
                    let params = squid_params(cfg.squid(k), &squid_pointer(cfg, k))?;
                    coupling_g(spectrum, &inputs, &cav, &params).context(|| "/coupling".into())?
                }
                (None, None) => unreachable!("normalized config always has a coupling"),
            };
            let (delta_c, delta_c_source) = match (cfg.cavity.delta_c_per_s, cfg.cavity.delta_c_over_g, spectrum) {
                (Some(d), _, _) => (d, "given"),
                (None, Some(r), _) => (r * g, "ratio"),
                (None, None, Some(s)) => (s.omega_a0 - omega_c, "spectrum"),
                _ => unreachable!("spectrum solved when Delta_c is not fixed"),
            };
            let d = cfg.drive(k);
            let (delta_uw, delta_uw_source, omega_uw) = match (d.omega_uw_ghz, d.delta_uw_per_s, d.delta_uw_over_omega) {
                (Some(f), _, _) => {
                    let w = ghz_to_rad_per_s(f);
                    (spectrum.expect("omega_uw requires a spectrum").omega_a1 - w, "spectrum", w)
                }
                (None, Some(x), _) => (x, "given", carrier(spectrum, x)),
                (None, None, Some(r)) => (r * d.omega_per_s, "ratio", carrier(spectrum, r * d.omega_per_s)),
                _ => unreachable!("validated: exactly one drive detuning input"),
            };
            let pointer = format!("/drive/{}", k.min(cfg.drive.len() - 1));
            let effective = EffectiveParams::from_detunings(g, d.omega_per_s, delta_c, delta_uw)
                .context(|| format!("effective parameters of SQUID {} ({pointer})", k + 1))?;
            warnings.extend(flag_warning(k, &effective.flags));
            squids.push(SquidSetup {
                g_eff_stated: effective.g_eff_implied_by_ratio(STATED_DELTA_OVER_G_EFF),
                effective,
                omega_uw,
                delta_c_source,
                delta_uw_source,
            });
        }
        Ok(Self { omega_c, squids, spectra: summaries, warnings })
    }

    pub fn eff(&self, k: usize) -> &EffectiveParams {
        &self.squids[k].effective
    }

    pub fn cavity(&self, cfg: &ExperimentConfig, n_max: usize) -> CavityParams {
        CavityParams { omega_c: self.omega_c, g: self.squids[0].effective.g, n_max, quality_factor: cfg.cavity.q }
    }

    /// Builds the configured model over the first `n` SQUIDs at truncation `n_max`.
    pub fn model(&self, cfg: &ExperimentConfig, n_max: usize) -> CliResult<SystemModel> {
        let variant = cfg.model.variant;
        let ctx = || format!("building {variant} (/model/variant)");
        match variant {
            Variant::FullRotating => {
                let channels: Vec<SquidChannel> = self
                    .squids
                    .iter()
                    .map(|s| SquidChannel::from_effective(&s.effective, self.omega_c, s.omega_uw))
                    .collect();
                build_full_rotating(&channels, &self.cavity(cfg, n_max)).context(ctx)
            }
            Variant::EffTwoVacuum => {
                if self.squids.len() != 2 {
                    return Err(CliError::config("/model/variant", "EFF_TWO_VACUUM runs two SQUIDs"));
                }
                build_eff_vacuum(&[*self.eff(0), *self.eff(1)], 2, (0, 1)).context(ctx)
            }
            Variant::EffTwoPhoton => {
                if self.squids.iter().any(|s| s.effective != self.squids[0].effective) {
                    return Err(CliError::config("/model/variant", "EFF_TWO_PHOTON needs identical SQUIDs"));
                }
                build_effective(variant, self.eff(0), n_max).context(ctx)
            }
            Variant::EffSingle => {
                Err(CliError::config("/model/variant", "EFF_SINGLE has no two-qubit register; use another variant"))
            }
        }
    }

    pub fn run_options(&self, cfg: &ExperimentConfig) -> CliResult<RunOptions> {
        let decoherence = match &cfg.decoherence {
            None => None,
            Some(d) => {
                let t1 = match (d.t1_s, d.r_ohm) {
                    (Some(t), _) => Some(t),
                    (None, Some(r)) => Some(t1_from_resistance(r).context(|| "/decoherence/R_ohm".into())?),
                    (None, None) => None,
                };
                let kappa = if d.cavity_loss { cfg.cavity.q.map(|q| self.omega_c / q) } else { None };
                Some(Decoherence { t1, kappa })
            }
        };
        Ok(RunOptions { switching: cfg.model.switching, samples: cfg.model.samples, decoherence })
    }
}

fn carrier(spectrum: Option<&SpectrumResult>, delta_uw: f64) -> f64 {
    match spectrum {
        Some(s) => s.omega_a1 - delta_uw,
        None => ghz_to_rad_per_s(NOMINAL_OMEGA_UW_GHZ),
    }
}
