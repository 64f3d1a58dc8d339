use super::{
    check_dim, integrate_dp45, min_eigenvalue, sample_times, CollapseChannel, DensityMatrix, Observables,
    Samples, Trajectory,
};
use crate::error::{invalid, Error, Result};
use crate::linalg::{expm, identity, kron};
use crate::model::SystemModel;
use crate::scalar::{lit, re, to_f64, CMat, CVec, Real};

/// Largest Hilbert dimension propagated through a dense Liouvillian exponential;
/// larger models are integrated with adaptive Runge–Kutta on ρ directly.
pub const SUPEROPERATOR_MAX_DIM: usize = 24;
/// Per-step tolerance of the direct integrator.
const DIRECT_TOL: f64 = 1e-10;
/// Negative eigenvalue that aborts an evolution.
pub const POSITIVITY_LIMIT: f64 = -1e-6;

/// Column-stacked Liouvillian: vec(dρ/dt) = 𝓛 vec(ρ).
pub fn liouvillian<T: Real>(h: &CMat<T>, channels: &[CollapseChannel<T>]) -> CMat<T> {
    let d = h.nrows();
    let id = identity::<T>(d);
    let minus_i = crate::scalar::cplx(T::zero(), -T::one());
    let mut l = (kron(&id, h) - kron(&h.transpose(), &id)) * minus_i;
    let half: T = lit(0.5);
    for ch in channels {
        let ldl = ch.op.ad_mul(&ch.op);
        let jump = kron(&ch.op.conjugate(), &ch.op);
        let anti = kron(&id, &ldl) + kron(&ldl.transpose(), &id);
        l += (jump - anti * re(half)) * re(ch.rate);
    }
    l
}

/// dρ/dt = -i[H, ρ] + Σ_k γ_k (L_k ρ L_k† - ½{L_k†L_k, ρ}).
pub fn lindblad_rhs<T: Real>(h: &CMat<T>, channels: &[CollapseChannel<T>], rho: &CMat<T>) -> CMat<T> {
    let minus_i = crate::scalar::cplx(T::zero(), -T::one());
    let mut out = (h * rho - rho * h) * minus_i;
    let half: T = lit(0.5);
    for ch in channels {
        let ldl = ch.op.ad_mul(&ch.op);
        let jump = &ch.op * rho * ch.op.adjoint();
        out += (jump - (&ldl * rho + rho * &ldl) * re(half)) * re(ch.rate);
    }
    out
}

/// Lindblad evolution of `rho0` under the model Hamiltonian and `channels`.
/// Aborts with [`Error::PositivityLoss`] when ρ develops an eigenvalue below
/// [`POSITIVITY_LIMIT`].
pub fn evolve_lindblad<T: Real>(
    model: &SystemModel<T>,
    channels: &[CollapseChannel<T>],
    rho0: &DensityMatrix<T>,
    t: T,
    samples: usize,
) -> Result<Trajectory<T>> {
    let d = model.dim();
    check_dim(d, rho0.dim())?;
    for ch in channels {
        if ch.op.nrows() != d || ch.op.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, actual: ch.op.nrows() });
        }
        if !(ch.rate >= T::zero()) {
            return Err(invalid("rate", "collapse rate must be >= 0"));
        }
    }
    let times = sample_times(t, samples)?;
    let h = &model.hamiltonian;
    let rhos: Vec<CMat<T>> = if d <= SUPEROPERATOR_MAX_DIM {
        let l = liouvillian(h, channels);
        let mut out = Vec::with_capacity(times.len());
        let mut v = CVec::from_column_slice(rho0.matrix().as_slice());
        let mut prev = T::zero();
        let mut cached: Option<(T, CMat<T>)> = None;
        for &tk in &times {
            let dt = tk - prev;
            if dt > T::zero() {
                let reuse = cached.as_ref().is_some_and(|(c, _)| (*c - dt).abs() <= lit::<T>(1e-12) * dt);
                if !reuse {
                    cached = Some((dt, expm(&(&l * re(dt)))));
                }
                v = &cached.as_ref().expect("cached propagator").1 * v;
            }
            prev = tk;
            out.push(CMat::from_column_slice(d, d, v.as_slice()));
        }
        out
    } else {
        let y0 = CVec::from_column_slice(rho0.matrix().as_slice());
        let (ys, _) = integrate_dp45(
            |_, y| {
                let rho = CMat::from_column_slice(d, d, y.as_slice());
                CVec::from_column_slice(lindblad_rhs(h, channels, &rho).as_slice())
            },
            &y0,
            &times,
            lit(DIRECT_TOL),
        )?;
        ys.into_iter().map(|y| CMat::from_column_slice(d, d, y.as_slice())).collect()
    };

    let mut states = Vec::with_capacity(rhos.len());
    let mut observables = Vec::with_capacity(rhos.len());
    for (rho, &tk) in rhos.into_iter().zip(&times) {
        let min = min_eigenvalue(&rho);
        if min < lit(POSITIVITY_LIMIT) {
            return Err(Error::PositivityLoss { t: to_f64(tk), min_eigenvalue: to_f64(min) });
        }
        observables.push(Observables::of_density(&model.basis, &rho));
        states.push(DensityMatrix::from_raw(rho));
    }
    Ok(Trajectory { times, samples: Samples::Mixed(states), observables, fidelity_vs_target: None })
}
