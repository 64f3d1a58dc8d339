//! Adaptive Dormand–Prince 5(4) integration of complex linear ODEs.

use nalgebra::{Complex, ComplexField};

use crate::error::{invalid, Error, Result};
use crate::scalar::{lit, to_f64, CVec, Real};

pub const TOL_MIN: f64 = 1e-12;
pub const TOL_MAX: f64 = 1e-6;

const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [&[f64]; 6] = [
    &[1.0 / 5.0],
    &[3.0 / 40.0, 9.0 / 40.0],
    &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
    &[19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
    &[9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0],
    &[35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub min_step: f64,
    pub max_step: f64,
}

/// Integrates `y' = f(t, y)` from `t = 0` and returns `y` at each of `times`
/// (ascending, nonnegative). The local error per step, measured in the max
/// norm and scaled by `1 + |y_i|`, is kept below `tol`.
pub fn integrate_dp45<T: Real, F>(mut f: F, y0: &CVec<T>, times: &[T], tol: T) -> Result<(Vec<CVec<T>>, OdeStats)>
where
    F: FnMut(T, &CVec<T>) -> CVec<T>,
{
    if !(tol >= lit(TOL_MIN) && tol <= lit(TOL_MAX)) {
        return Err(invalid("tol", format!("must lie in [{TOL_MIN:e}, {TOL_MAX:e}]")));
    }
    if times.iter().any(|&t| !(t >= T::zero())) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("times", "must be ascending and >= 0"));
    }
    let c: Vec<T> = C.iter().map(|&x| lit(x)).collect();
    let a: Vec<Vec<Complex<T>>> = A.iter().map(|row| row.iter().map(|&x| Complex::from(lit::<T>(x))).collect()).collect();
    let e: Vec<T> = E.iter().map(|&x| lit(x)).collect();
    let safety: T = lit(0.9);
    let (grow_max, shrink_min): (T, T) = (lit(5.0), lit(0.2));
    let fifth: T = lit(0.2);
    let eps: T = lit(f64::EPSILON);

    let mut stats = OdeStats { min_step: f64::INFINITY, ..Default::default() };
    let mut out = Vec::with_capacity(times.len());
    let mut t = T::zero();
    let mut y = y0.clone();
    let mut k1 = f(t, &y);
    let t_end = times.last().copied().unwrap_or_else(T::zero);
    let rate = k1.iter().fold(T::zero(), |m, z| m.max(z.modulus()));
    let mut h = if rate > T::zero() { lit::<T>(0.01) * tol.powf(fifth) / rate } else { t_end };
    h = h.min(t_end).max(eps);

    for &target in times {
        while t < target {
            let remaining = target - t;
            let last_step = h >= remaining;
            let step = if last_step { remaining } else { h };
            let hc = Complex::from(step);
            let mut ks: Vec<CVec<T>> = Vec::with_capacity(7);
            ks.push(k1.clone());
            for stage in 0..6 {
                let mut ys = y.clone();
                for (j, &aj) in a[stage].iter().enumerate() {
                    if aj != Complex::from(T::zero()) {
                        ys.axpy(hc * aj, &ks[j], Complex::from(T::one()));
                    }
                }
                if stage == 5 {
                    // FSAL: the last stage point is the fifth-order solution.
                    let k7 = f(t + step, &ys);
                    ks.push(k7);
                    let mut err = T::zero();
                    for i in 0..y.len() {
                        let mut ei = Complex::from(T::zero());
                        for (j, &ej) in e.iter().enumerate() {
                            if ej != T::zero() {
                                ei += ks[j][i] * ej;
                            }
                        }
                        let scale = T::one() + y[i].modulus().max(ys[i].modulus());
                        err = err.max((ei * step).modulus() / scale);
                    }
                    let ratio = err / tol;
                    if ratio <= T::one() {
                        t = if last_step { target } else { t + step };
                        y = ys;
                        k1 = ks.pop().expect("seven stages");
                        stats.accepted += 1;
                        let s = to_f64(step);
                        stats.min_step = stats.min_step.min(s);
                        stats.max_step = stats.max_step.max(s);
                        let grow = if ratio > T::zero() {
                            (safety * ratio.powf(-fifth)).min(grow_max)
                        } else {
                            grow_max
                        };
                        if !last_step {
                            h = step * grow;
                        } else {
                            h = h.max(step * grow.min(T::one()));
                        }
                    } else {
                        stats.rejected += 1;
                        h = step * (safety * ratio.powf(-fifth)).max(shrink_min);
                    }
                    break;
                }
                ks.push(f(t + c[stage] * step, &ys));
            }
            let floor = eps * lit::<T>(16.0) * t.abs().max(target.abs());
            if h <= floor && t < target {
                return Err(Error::StepUnderflow { t: to_f64(t), h: to_f64(h) });
            }
        }
        out.push(y.clone());
    }
    if stats.accepted == 0 {
        stats.min_step = 0.0;
    }
    Ok((out, stats))
}
