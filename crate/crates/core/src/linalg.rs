//! Dense complex linear algebra used throughout: tensor products, Hermitian
//! eigendecomposition and a scaling-and-squaring matrix exponential.

use nalgebra::{Complex, ComplexField, DMatrix, DVector};

use crate::scalar::{cis, lit, re, CMat, CVec, Real};

pub fn identity<T: Real>(n: usize) -> CMat<T> {
    CMat::identity(n, n)
}

/// Kronecker product `a ⊗ b`.
pub fn kron<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    a.kronecker(b)
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all<T: Real>(factors: &[CMat<T>]) -> CMat<T> {
    let mut it = factors.iter();
    let first = it.next().cloned().unwrap_or_else(|| identity(1));
    it.fold(first, |acc, f| acc.kronecker(f))
}

pub fn dagger<T: Real>(m: &CMat<T>) -> CMat<T> {
    m.adjoint()
}

pub fn commutator<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    a * b - b * a
}

/// Largest entry modulus.
pub fn max_abs<T: Real>(m: &CMat<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(z.modulus()))
}

/// `max|H - H†| / max|H|` (absolute when `H = 0`).
pub fn hermiticity_defect<T: Real>(h: &CMat<T>) -> T {
    let scale = max_abs(h);
    let d = max_abs(&(h - h.adjoint()));
    if scale > T::zero() {
        d / scale
    } else {
        d
    }
}

/// `max|U†U - I|`.
pub fn unitarity_defect<T: Real>(u: &CMat<T>) -> T {
    let n = u.nrows();
    max_abs(&(u.adjoint() * u - identity::<T>(n)))
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted ascending.
#[derive(Clone, Debug)]
pub struct HermitianEigen<T: Real> {
    pub values: DVector<T>,
    /// Columns are the orthonormal eigenvectors, in the order of `values`.
    pub vectors: CMat<T>,
}

impl<T: Real> HermitianEigen<T> {
    pub fn new(h: &CMat<T>) -> Self {
        // Symmetrize first so roundoff asymmetry never leaks into the solver.
        let half: Complex<T> = re(lit(0.5));
        let sym = (h + h.adjoint()) * half;
        let eig = nalgebra::linalg::SymmetricEigen::new(sym);
        let n = eig.eigenvalues.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| {
            eig.eigenvalues[i]
                .partial_cmp(&eig.eigenvalues[j])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
        let mut vectors = CMat::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            vectors.set_column(dst, &eig.eigenvectors.column(src));
        }
        Self { values, vectors }
    }

    /// `f(H) = V diag(f(λ)) V†`.
    pub fn apply_fn(&self, f: impl Fn(T) -> Complex<T>) -> CMat<T> {
        let mut scaled = self.vectors.clone();
        for (j, &l) in self.values.iter().enumerate() {
            let fl = f(l);
            for z in scaled.column_mut(j).iter_mut() {
                *z *= fl;
            }
        }
        scaled * self.vectors.adjoint()
    }

    /// `exp(-i H t)` for `H` given in angular-frequency units.
    pub fn propagator(&self, t: T) -> CMat<T> {
        self.apply_fn(|l| cis(-l * t))
    }

    /// `exp(-i H t) ψ` without forming the propagator.
    pub fn evolve(&self, psi: &CVec<T>, t: T) -> CVec<T> {
        let mut coeffs = self.vectors.adjoint() * psi;
        for (c, &l) in coeffs.iter_mut().zip(self.values.iter()) {
            *c *= cis(-l * t);
        }
        &self.vectors * coeffs
    }
}

/// Inverse square root of a Hermitian positive-definite matrix.
pub fn inv_sqrt_hermitian<T: Real>(m: &CMat<T>) -> CMat<T> {
    HermitianEigen::new(m).apply_fn(|l| re(T::one() / l.sqrt()))
}

/// Matrix 1-norm (max column sum).
pub fn norm_1<T: Real>(m: &CMat<T>) -> T {
    (0..m.ncols()).fold(T::zero(), |acc, j| {
        acc.max(m.column(j).iter().fold(T::zero(), |s, z| s + z.modulus()))
    })
}

const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371_920_351_148_152;

/// General matrix exponential by scaling and squaring with a degree-13 Padé
/// approximant. Independent of any eigendecomposition.
pub fn expm<T: Real>(a: &CMat<T>) -> CMat<T> {
    let n = a.nrows();
    let norm = crate::scalar::to_f64(norm_1(a));
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let scale: Complex<T> = re(lit(0.5f64.powi(s)));
    let a = a * scale;
    let b = |k: usize| -> Complex<T> { re(lit(PADE13[k])) };
    let ident = identity::<T>(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9))
        + &a6 * b(7)
        + &a4 * b(5)
        + &a2 * b(3)
        + &ident * b(1);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8))
        + &a6 * b(6)
        + &a4 * b(4)
        + &a2 * b(2)
        + &ident * b(0);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).unwrap_or_else(|| DMatrix::from_element(n, n, Complex::new(lit(f64::NAN), lit(f64::NAN))));
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// Optimal global phase `e^{iφ}` aligning `a` to `b` (maximizing Re tr(e^{-iφ} b† a)),
/// returned together with `‖a - e^{iφ} b‖_F`.
pub fn phase_aligned_distance<T: Real>(a: &CMat<T>, b: &CMat<T>) -> (T, Complex<T>) {
    let overlap = (b.adjoint() * a).trace();
    let phase = if overlap.modulus() > T::zero() {
        overlap / re(overlap.modulus())
    } else {
        re(T::one())
    };
    ((a - b * phase).norm(), phase)
}

/// Inner product `⟨a|b⟩`.
pub fn inner<T: Real>(a: &CVec<T>, b: &CVec<T>) -> Complex<T> {
    a.dotc(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    fn random_hermitian(n: usize, seed: u64) -> CMat<f64> {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let m = CMat::<f64>::from_fn(n, n, |_, _| cplx(next(), next()));
        &m + m.adjoint()
    }

    #[test]
    fn expm_of_zero_is_identity() {
        let z = CMat::<f64>::zeros(3, 3);
        assert!(max_abs(&(expm(&z) - identity::<f64>(3))) < 1e-15);
    }

    #[test]
    fn expm_matches_eigen_propagator() {
        for seed in 0..5 {
            let h = random_hermitian(6, seed) * re(7.0);
            let t = 1.3;
            let via_eig = HermitianEigen::new(&h).propagator(t);
            let via_pade = expm(&(&h * cplx(0.0, -t)));
            assert!(max_abs(&(via_eig - via_pade)) < 1e-11);
        }
    }

    #[test]
    fn expm_pauli_x_rotation() {
        // exp(-i θ X) = cos θ I - i sin θ X
        let theta = 0.7f64;
        let x = CMat::<f64>::from_row_slice(2, 2, &[re(0.0), re(1.0), re(1.0), re(0.0)]);
        let u = expm(&(&x * cplx(0.0, -theta)));
        assert!((u[(0, 0)] - re(theta.cos())).norm() < 1e-14);
        assert!((u[(0, 1)] - cplx(0.0, -theta.sin())).norm() < 1e-14);
    }

    #[test]
    fn eigenvalues_sorted_and_orthonormal() {
        let h = random_hermitian(8, 11);
        let e = HermitianEigen::new(&h);
        assert!(e.values.as_slice().windows(2).all(|w| w[0] <= w[1]));
        assert!(unitarity_defect(&e.vectors) < 1e-12);
        let recon = e.apply_fn(re);
        assert!(max_abs(&(recon - &h)) < 1e-12);
    }

    #[test]
    fn phase_alignment_recovers_global_phase() {
        let h = random_hermitian(4, 3);
        let u = HermitianEigen::new(&h).propagator(0.4);
        let shifted = &u * cis(1.1);
        let (d, ph) = phase_aligned_distance(&shifted, &u);
        assert!(d < 1e-12);
        assert!((ph - cis(1.1)).norm() < 1e-12);
    }
}
