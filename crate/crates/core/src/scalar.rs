//! Scalar abstraction shared by every numerical kernel.

pub use nalgebra::Complex;
use nalgebra::{DMatrix, DVector, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point type the simulation kernels are generic over (`f32`, `f64`).
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive {}

impl Real for f32 {}
impl Real for f64 {}

/// Dense complex matrix over `T`.
pub type CMat<T> = DMatrix<Complex<T>>;
/// Dense complex column vector over `T`.
pub type CVec<T> = DVector<Complex<T>>;

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    nalgebra::convert(x)
}

/// Lossy conversion to `f64` for reporting.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[inline]
pub fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub fn re<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

/// `exp(i phase)`.
#[inline]
pub fn cis<T: Real>(phase: T) -> Complex<T> {
    Complex::new(phase.cos(), phase.sin())
}

/// `base` raised to the resolution floor of `T` (64 ulp at 1), so that
/// f64-calibrated limits remain meaningful in lower precision.
#[inline]
pub fn tolerance<T: Real>(base: f64) -> T {
    let floor = 64.0 * to_f64(T::default_epsilon());
    lit(base.max(floor))
}
