//! CODATA 2018 constants, SI units.

use std::f64::consts::PI;

/// Reduced Planck constant ħ (J s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Planck constant h (J s), exact.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Elementary charge e (C), exact.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Magnetic flux quantum Φ₀ = h / 2e (Wb).
pub const FLUX_QUANTUM: f64 = PLANCK / (2.0 * ELEMENTARY_CHARGE);
/// Vacuum permeability μ₀ (N A⁻²).
pub const MU_0: f64 = 1.256_637_062_12e-6;

pub const TWO_PI: f64 = 2.0 * PI;

/// Converts a frequency in GHz to an angular frequency in rad/s.
pub fn ghz_to_rad_per_s(f_ghz: f64) -> f64 {
    TWO_PI * f_ghz * 1e9
}

/// Converts an angular frequency in rad/s to GHz.
pub fn rad_per_s_to_ghz(omega: f64) -> f64 {
    omega / TWO_PI / 1e9
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flux_quantum_matches_codata() {
        assert!((FLUX_QUANTUM - 2.067_833_848e-15).abs() < 1e-23);
        assert!((PLANCK / TWO_PI - HBAR).abs() / HBAR < 1e-9);
    }

    #[test]
    fn ghz_round_trip() {
        let w = ghz_to_rad_per_s(29.7);
        assert!((rad_per_s_to_ghz(w) - 29.7).abs() < 1e-12);
    }
}
