#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use squidcav_core::constants::ghz_to_rad_per_s;
use squidcav_core::coupling::{CavityParams, EffectiveParams};
use squidcav_core::model::{build_full_rotating, SquidChannel, SystemModel};
use squidcav_core::scalar::{cplx, CVec};

pub const OMEGA_C_GHZ: f64 = 29.7;
pub const OMEGA_UW_GHZ: f64 = 20.0;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Two identical SQUIDs with both detunings at `ratio` times their coupling.
pub fn full_model(ratio: f64, n_max: usize, q: Option<f64>) -> (SystemModel<f64>, EffectiveParams<f64>) {
    let eff = EffectiveParams::<f64>::with_ratio(ratio);
    let omega_c = ghz_to_rad_per_s(OMEGA_C_GHZ);
    let ch = SquidChannel::from_effective(&eff, omega_c, ghz_to_rad_per_s(OMEGA_UW_GHZ));
    let cav = CavityParams { omega_c, g: eff.g, n_max, quality_factor: q };
    (build_full_rotating(&[ch, ch], &cav).unwrap(), eff)
}

/// Haar-random normalized state from Gaussian components.
pub fn random_state(rng: &mut impl Rng, dim: usize) -> CVec<f64> {
    let v = CVec::from_fn(dim, |_, _| cplx(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let n = v.norm();
    v.unscale(n)
}
