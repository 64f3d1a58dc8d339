//! Timescale arithmetic for the dispersive scheme: interaction time against
//! the effective decay times of level |a⟩ and of the cavity.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::coupling::EffectiveParams;
use crate::error::{invalid, Error, Result};

/// Resistance giving T₁ = 1 μs under the linear damping rule.
pub const T1_RESISTANCE_SCALE: f64 = 6.0e7;

/// Required ratio T_sc / (T₁/P_a).
pub const LEVEL_A_MARGIN: f64 = 0.01;

/// Required ratio T_sc / (T_c/P_c).
pub const CAVITY_MARGIN: f64 = 0.1;

/// The alternative g_eff reading takes δ = 10 g_eff literally.
pub const STATED_DELTA_OVER_G_EFF: f64 = 10.0;

/// T₁ = (R / 60 MΩ) μs.
pub fn t1_from_resistance(r_ohm: f64) -> Result<f64> {
    if !(r_ohm > 0.0) || !r_ohm.is_finite() {
        return Err(invalid("R", "resistance must be finite and > 0"));
    }
    Ok(r_ohm / T1_RESISTANCE_SCALE * 1e-6)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    /// Supplied directly.
    Given,
    /// Derived from the damping resistance.
    Resistance,
    /// Perturbative bound from the dispersive ratios.
    Bound,
    /// Maximum along a simulated trajectory.
    Trajectory,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityInputs {
    /// Junction damping resistance (Ω); used when `t1` is absent.
    pub resistance: Option<f64>,
    /// T₁ of level |a⟩ (s).
    pub t1: Option<f64>,
    pub quality_factor: Option<f64>,
    /// Cavity angular frequency (rad/s).
    pub omega_c: f64,
    pub eff: EffectiveParams<f64>,
    /// Peak |a⟩ population; defaults to max((g/Δ_c)², (Ω/Δ_μw)²).
    pub p_a: Option<f64>,
    /// Peak cavity population; defaults to (g_eff/δ)².
    pub p_c: Option<f64>,
    /// Whether supplied `p_a`/`p_c` come from a trajectory.
    pub populations_measured: bool,
}

impl FeasibilityInputs {
    pub fn new(omega_c: f64, eff: EffectiveParams<f64>) -> Self {
        Self {
            resistance: None,
            t1: None,
            quality_factor: None,
            omega_c,
            eff,
            p_a: None,
            p_c: None,
            populations_measured: false,
        }
    }
}

/// Every field is a closed-form function of the inputs (times in seconds).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub t1_s: f64,
    pub t1_source: Source,
    pub resistance_ohm: Option<f64>,
    pub g_eff: f64,
    pub gamma: f64,
    /// π/(2γ) = πδ/(2 g_eff²).
    pub t_sc_s: f64,
    /// δ / 10.
    pub g_eff_stated: f64,
    /// π/(2γ) with the stated g_eff.
    pub t_sc_stated_s: f64,
    pub p_a: f64,
    pub p_a_source: Source,
    pub p_a_bound: f64,
    pub p_c: f64,
    pub p_c_source: Source,
    /// (g_eff/δ)² with the formula g_eff.
    pub p_c_bound: f64,
    /// (g_eff/δ)² with the stated g_eff.
    pub p_c_bound_stated: f64,
    pub t1_over_p_a_s: f64,
    pub quality_factor: f64,
    /// Q_c / ω_c.
    pub t_c_s: f64,
    pub t_c_over_p_c_s: f64,
    /// (T₁/P_a) / T_sc.
    pub level_a_margin: f64,
    /// (T_c/P_c) / T_sc.
    pub cavity_margin: f64,
    pub level_a_margin_stated: f64,
    pub cavity_margin_stated: f64,
    /// T_sc < 0.01 · T₁/P_a.
    pub level_a_ok: bool,
    /// T_sc < 0.1 · T_c/P_c.
    pub cavity_ok: bool,
    pub level_a_ok_stated: bool,
    pub cavity_ok_stated: bool,
    pub delta_c_over_g: f64,
    pub delta_uw_over_omega: f64,
    pub delta_over_g_eff: f64,
}

impl FeasibilityReport {
    pub fn all_ok(&self) -> bool {
        self.level_a_ok && self.cavity_ok
    }
}

fn positive(name: &'static str, x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(invalid(name, format!("must be finite and > 0, got {x}")))
    }
}

pub fn feasibility_report(inputs: &FeasibilityInputs) -> Result<FeasibilityReport> {
    let eff = &inputs.eff;
    if !(eff.gamma > 0.0) {
        return Err(invalid("gamma", "interaction time needs gamma > 0"));
    }
    let omega_c = positive("omega_c", inputs.omega_c)?;
    let (t1, t1_source) = match (inputs.t1, inputs.resistance) {
        (Some(t1), _) => (positive("T1", t1)?, Source::Given),
        (None, Some(r)) => (t1_from_resistance(r)?, Source::Resistance),
        (None, None) => return Err(Error::MissingInput("T1 or R")),
    };
    let q = positive("Q_c", inputs.quality_factor.ok_or(Error::MissingInput("Q_c"))?)?;

    let measured = if inputs.populations_measured { Source::Trajectory } else { Source::Given };
    let p_a_bound = (eff.g / eff.delta_c).powi(2).max((eff.omega / eff.delta_uw).powi(2));
    let (p_a, p_a_source) = match inputs.p_a {
        Some(p) => (positive("P_a", p)?, measured),
        None => (p_a_bound, Source::Bound),
    };
    let p_c_bound = (eff.g_eff / eff.delta).powi(2);
    let g_eff_stated = eff.g_eff_implied_by_ratio(STATED_DELTA_OVER_G_EFF);
    let p_c_bound_stated = (g_eff_stated / eff.delta).powi(2);
    let (p_c, p_c_source) = match inputs.p_c {
        Some(p) => (positive("P_c", p)?, measured),
        None => (p_c_bound, Source::Bound),
    };

    let t_sc = FRAC_PI_2 / eff.gamma;
    let gamma_stated = g_eff_stated * g_eff_stated / eff.delta.abs();
    let t_sc_stated = FRAC_PI_2 / gamma_stated;
    let t1_over_pa = t1 / p_a;
    let t_c = q / omega_c;
    let t_c_over_pc = t_c / p_c;
    let [delta_c_over_g, delta_uw_over_omega, delta_over_g_eff] = eff.validity_ratios();

    Ok(FeasibilityReport {
        t1_s: t1,
        t1_source,
        resistance_ohm: inputs.resistance,
        g_eff: eff.g_eff,
        gamma: eff.gamma,
        t_sc_s: t_sc,
        g_eff_stated,
        t_sc_stated_s: t_sc_stated,
        p_a,
        p_a_source,
        p_a_bound,
        p_c,
        p_c_source,
        p_c_bound,
        p_c_bound_stated,
        t1_over_p_a_s: t1_over_pa,
        quality_factor: q,
        t_c_s: t_c,
        t_c_over_p_c_s: t_c_over_pc,
        level_a_margin: t1_over_pa / t_sc,
        cavity_margin: t_c_over_pc / t_sc,
        level_a_margin_stated: t1_over_pa / t_sc_stated,
        cavity_margin_stated: t_c_over_pc / t_sc_stated,
        level_a_ok: t_sc < LEVEL_A_MARGIN * t1_over_pa,
        cavity_ok: t_sc < CAVITY_MARGIN * t_c_over_pc,
        level_a_ok_stated: t_sc_stated < LEVEL_A_MARGIN * t1_over_pa,
        cavity_ok_stated: t_sc_stated < CAVITY_MARGIN * t_c_over_pc,
        delta_c_over_g,
        delta_uw_over_omega,
        delta_over_g_eff,
    })
}
