//! Stationary states of the rf-SQUID flux Hamiltonian
//!
//! ```text
//! H_s = Q²/2C + (Φ - Φ_x)²/2L - E_J cos(2π Φ/Φ₀),   E_J = I_c Φ₀ / 2π
//! ```
//!
//! solved on a uniform flux grid with the periodic Fourier-grid (sinc DVR)
//! kinetic operator. Internally the problem is scaled to flux in units of Φ₀
//! and energy in units of h·GHz so that single precision does not underflow;
//! results are reported in SI.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::constants::{FLUX_QUANTUM, HBAR, PLANCK, TWO_PI};
use crate::error::{invalid, Error, Result};
use crate::scalar::{lit, to_f64, tolerance, Real};

/// Boundary amplitude, relative to the peak, above which a level is treated
/// as leaking out of the flux window.
pub const BOUNDARY_TAIL_LIMIT: f64 = 1e-8;
/// Largest tolerated relative shift of `E_a - E_0` when the grid is doubled.
pub const CONVERGENCE_LIMIT: f64 = 1e-6;

/// Device constants of one rf SQUID, SI units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SquidParams<T> {
    /// Junction capacitance C (F).
    pub capacitance: T,
    /// Loop inductance L (H).
    pub inductance: T,
    /// Junction critical current I_c (A).
    pub critical_current: T,
    /// Static external flux Φ_x / Φ₀.
    pub external_flux_ratio: T,
}

impl<T: Real> SquidParams<T> {
    /// Builds parameters from fF, pH, μA and Φ_x/Φ₀.
    pub fn from_lab_units(c_ff: f64, l_ph: f64, ic_ua: f64, phix_phi0: f64) -> Result<Self> {
        let p = Self {
            capacitance: lit(c_ff * 1e-15),
            inductance: lit(l_ph * 1e-12),
            critical_current: lit(ic_ua * 1e-6),
            external_flux_ratio: lit(phix_phi0),
        };
        p.validate()?;
        Ok(p)
    }

    /// C = 90 fF, L = 100 pH, I_c = 3.75 μA, Φ_x = 0.4995 Φ₀.
    pub fn nominal() -> Self {
        Self::from_lab_units(90.0, 100.0, 3.75, 0.4995).expect("preset is valid")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.capacitance > T::zero()) {
            return Err(invalid("capacitance", "must be > 0"));
        }
        if !(self.inductance > T::zero()) {
            return Err(invalid("inductance", "must be > 0"));
        }
        if !(self.critical_current >= T::zero()) {
            return Err(invalid("critical_current", "must be >= 0"));
        }
        let phix = self.external_flux_ratio;
        if !(phix >= T::zero() && phix < T::one()) {
            return Err(invalid("external_flux_ratio", "must lie in [0, 1)"));
        }
        Ok(())
    }

    /// E_J = I_c Φ₀ / 2π (J).
    pub fn josephson_energy(&self) -> T {
        self.critical_current * lit(FLUX_QUANTUM / TWO_PI)
    }

    /// Screening parameter β_L = 2π L I_c / Φ₀.
    pub fn beta_l(&self) -> T {
        self.inductance * self.critical_current * lit(TWO_PI / FLUX_QUANTUM)
    }

    /// Potential U(Φ) in J for flux `phi` given in units of Φ₀.
    pub fn potential(&self, x: T) -> T {
        let scale = PotentialScale::new(self);
        lit::<T>(PLANCK * 1e9) * scale.potential_ghz(x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum DiscretizationScheme {
    /// Periodic Fourier-grid Hamiltonian (sinc discrete variable representation).
    #[default]
    FourierGrid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub num_points: usize,
    /// Half width of the flux window in units of Φ₀, centred on Φ_x.
    pub halfwidth: f64,
    pub scheme: DiscretizationScheme,
    /// Number of eigenpairs returned (at least 6).
    pub levels: usize,
    /// Re-solve on a doubled grid and reject a shift of `E_a - E_0` above
    /// [`CONVERGENCE_LIMIT`].
    pub check_convergence: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            num_points: 512,
            halfwidth: 0.35,
            scheme: DiscretizationScheme::FourierGrid,
            levels: 6,
            check_convergence: true,
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_points < 64 || !self.num_points.is_multiple_of(2) {
            return Err(invalid("num_points", "must be an even number >= 64"));
        }
        if !(self.halfwidth > 0.0) {
            return Err(invalid("halfwidth", "must be > 0"));
        }
        if self.levels < 6 {
            return Err(invalid("levels", "at least 6 levels are required"));
        }
        Ok(())
    }
}

/// Which eigenstates play the roles of |0⟩, |1⟩ and |a⟩.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelMap {
    pub zero: usize,
    pub one: usize,
    pub a: usize,
}

/// Outcome of the Λ-configuration sanity check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaCheck {
    pub valid: bool,
    /// Candidate |a⟩ indices with coupling strength `min(|⟨0|Φ|k⟩|, |⟨1|Φ|k⟩|)` (Wb),
    /// strongest first.
    pub ranked_candidates: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceInfo {
    pub num_points: usize,
    /// Relative change of `E_a - E_0` on the doubled grid, when checked.
    pub relative_shift: Option<f64>,
    /// Largest boundary tail ratio over all returned levels.
    pub max_boundary_tail: f64,
}

/// Eigenstructure of one SQUID.
#[derive(Clone, Debug)]
pub struct SpectrumResult<T: Real> {
    /// Lowest eigenenergies (J), strictly increasing.
    pub energies: Vec<T>,
    pub level_map: LevelMap,
    /// (E_a - E_0)/ħ (rad/s), equal to `omega_a1 + omega_10`.
    pub omega_a0: T,
    /// (E_a - E_1)/ħ (rad/s).
    pub omega_a1: T,
    /// (E_1 - E_0)/ħ (rad/s).
    pub omega_10: T,
    /// ⟨i|Φ|j⟩ (Wb) for i, j ∈ (|0⟩, |1⟩, |a⟩) in that order.
    pub flux_elements: [[T; 3]; 3],
    /// ⟨Φ⟩ per returned level (Wb).
    pub mean_flux: Vec<T>,
    pub lambda_check: LambdaCheck,
    pub convergence: ConvergenceInfo,
    /// Grid points in units of Φ₀.
    pub grid: Vec<T>,
    /// Discretely normalized eigenvectors on `grid`.
    pub wavefunctions: Vec<DVector<T>>,
}

impl<T: Real> SpectrumResult<T> {
    pub fn flux_0a(&self) -> T {
        self.flux_elements[0][2]
    }

    pub fn flux_1a(&self) -> T {
        self.flux_elements[1][2]
    }

    pub fn flux_01(&self) -> T {
        self.flux_elements[0][1]
    }

    /// Energy of level `i` relative to the ground state in GHz (E/h).
    pub fn level_ghz(&self, i: usize) -> f64 {
        to_f64(self.energies[i] - self.energies[0]) / PLANCK / 1e9
    }

    pub fn omega_a0_ghz(&self) -> f64 {
        to_f64(self.omega_a0) / TWO_PI / 1e9
    }
}

/// Prefactors of the scaled problem (x = Φ/Φ₀, energy in h·GHz).
#[derive(Clone, Copy, Debug)]
struct PotentialScale<T> {
    kinetic: T,
    inductive: T,
    josephson: T,
    center: T,
}

impl<T: Real> PotentialScale<T> {
    fn new(p: &SquidParams<T>) -> Self {
        let unit = PLANCK * 1e9;
        let c = to_f64(p.capacitance);
        let l = to_f64(p.inductance);
        let ej = to_f64(p.critical_current) * FLUX_QUANTUM / TWO_PI;
        Self {
            kinetic: lit(HBAR * HBAR / (2.0 * c * FLUX_QUANTUM * FLUX_QUANTUM) / unit),
            inductive: lit(FLUX_QUANTUM * FLUX_QUANTUM / (2.0 * l) / unit),
            josephson: lit(ej / unit),
            center: p.external_flux_ratio,
        }
    }

    fn potential_ghz(&self, x: T) -> T {
        let d = x - self.center;
        self.inductive * d * d - self.josephson * (T::two_pi() * x).cos()
    }
}

fn flux_grid<T: Real>(center: T, halfwidth: f64, n: usize) -> Vec<T> {
    let hw: T = lit(halfwidth);
    let dx = (hw + hw) / lit(n as f64);
    (0..n).map(|k| center - hw + dx * lit(k as f64)).collect()
}

/// Fourier-grid Hamiltonian matrix in units of h·GHz together with its grid
/// (units of Φ₀).
pub fn fourier_grid_hamiltonian<T: Real>(
    params: &SquidParams<T>,
    num_points: usize,
    halfwidth: f64,
) -> (Vec<T>, DMatrix<T>) {
    let scale = PotentialScale::new(params);
    let n = num_points;
    let grid = flux_grid(params.external_flux_ratio, halfwidth, n);
    let dx = grid[1] - grid[0];
    let nf: T = lit(n as f64);
    let k2 = (T::pi() / dx) * (T::pi() / dx);
    let two: T = lit(2.0);
    let three: T = lit(3.0);
    let mut h = DMatrix::<T>::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            let value = if j == k {
                k2 * (T::one() + two / (nf * nf)) / three
            } else {
                let d = j as i64 - k as i64;
                let sign = if d.rem_euclid(2) == 0 { T::one() } else { -T::one() };
                let s = (T::pi() * lit(d as f64) / nf).sin();
                sign * two * k2 / (nf * nf * s * s)
            };
            h[(j, k)] = scale.kinetic * value;
        }
        h[(j, j)] += scale.potential_ghz(grid[j]);
    }
    (grid, h)
}

/// Solves for the lowest eigenpairs with |a⟩ taken as eigenstate index 2.
pub fn solve_squid_spectrum<T: Real>(
    params: &SquidParams<T>,
    grid: &GridConfig,
) -> Result<SpectrumResult<T>> {
    solve_squid_spectrum_with(params, grid, 2)
}

/// Solves for the lowest eigenpairs with |a⟩ = eigenstate `a_index`.
pub fn solve_squid_spectrum_with<T: Real>(
    params: &SquidParams<T>,
    grid: &GridConfig,
    a_index: usize,
) -> Result<SpectrumResult<T>> {
    params.validate()?;
    grid.validate()?;
    if a_index < 2 {
        return Err(invalid("a_index", "|a> must be an excited state above |1> (index >= 2)"));
    }
    let n_levels = grid.levels.max(a_index + 1);
    if n_levels > grid.num_points {
        return Err(invalid("levels", "more levels requested than grid points"));
    }

    let (xs, h) = fourier_grid_hamiltonian(params, grid.num_points, grid.halfwidth);
    let eig = nalgebra::linalg::SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..grid.num_points).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    order.truncate(n_levels);

    let energies_ghz: Vec<T> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    if energies_ghz.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("spectrum", "degenerate eigenvalues; the level ordering is ambiguous"));
    }

    let mut wavefunctions: Vec<DVector<T>> = order
        .iter()
        .map(|&i| {
            let mut v: DVector<T> = eig.eigenvectors.column(i).into_owned();
            let peak = v.iter().fold(T::zero(), |m, &z| if z.abs() > m.abs() { z } else { m });
            if peak < T::zero() {
                v.neg_mut();
            }
            v
        })
        .collect();

    let flux_me = |a: &DVector<T>, b: &DVector<T>| -> T {
        a.iter().zip(b.iter()).zip(xs.iter()).fold(T::zero(), |s, ((&p, &q), &x)| s + p * x * q)
    };

    // Real phases: choose signs of |0⟩ and |1⟩ so both Λ couplings are nonnegative.
    for lo in 0..2 {
        if flux_me(&wavefunctions[lo], &wavefunctions[a_index]) < T::zero() {
            wavefunctions[lo].neg_mut();
        }
    }

    let phi0: T = lit(FLUX_QUANTUM);
    let lambda = [0usize, 1, a_index];
    let mut flux_elements = [[T::zero(); 3]; 3];
    for (r, &i) in lambda.iter().enumerate() {
        for (c, &j) in lambda.iter().enumerate().skip(r) {
            let me = flux_me(&wavefunctions[i], &wavefunctions[j]) * phi0;
            flux_elements[r][c] = me;
            flux_elements[c][r] = me;
        }
    }
    let mean_flux = wavefunctions.iter().map(|w| flux_me(w, w) * phi0).collect();

    let tail = |w: &DVector<T>| -> f64 {
        let peak = w.iter().fold(T::zero(), |m, &z| m.max(z.abs()));
        let edge = w[0].abs().max(w[w.len() - 1].abs());
        to_f64(edge / peak)
    };
    let max_boundary_tail = wavefunctions.iter().map(tail).fold(0.0, f64::max);
    let tail_limit = to_f64(tolerance::<T>(BOUNDARY_TAIL_LIMIT));
    for &level in &lambda {
        let t = tail(&wavefunctions[level]);
        if t > tail_limit {
            return Err(Error::BoundaryLeak { level, tail: t, limit: tail_limit });
        }
    }

    let gap = energies_ghz[a_index] - energies_ghz[0];
    let relative_shift = if grid.check_convergence {
        let (_, h2) = fourier_grid_hamiltonian(params, 2 * grid.num_points, grid.halfwidth);
        let mut e2: Vec<T> = h2.symmetric_eigenvalues().iter().copied().collect();
        e2.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let shift = to_f64(((e2[a_index] - e2[0]) - gap).abs() / gap.abs());
        let limit = to_f64(tolerance::<T>(CONVERGENCE_LIMIT));
        if shift > limit {
            return Err(Error::NotConverged { relative_shift: shift, limit });
        }
        Some(shift)
    } else {
        None
    };

    let scale = (flux_elements[0][1]).abs();
    let mut ranked: Vec<(usize, f64)> = (2..n_levels.min(6).max(a_index + 1))
        .map(|k| {
            let c0 = flux_me(&wavefunctions[0], &wavefunctions[k]).abs();
            let c1 = flux_me(&wavefunctions[1], &wavefunctions[k]).abs();
            (k, to_f64(c0.min(c1) * phi0))
        })
        .collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
    let threshold = to_f64(scale) * 0.01;
    let valid = to_f64(flux_elements[0][2].abs()) > threshold
        && to_f64(flux_elements[1][2].abs()) > threshold;
    if !valid {
        log::warn!("|a> = level {a_index} fails the Lambda check; ranked candidates {ranked:?}");
    }

    let ghz_to_w: T = lit(TWO_PI * 1e9);
    let omega_10 = (energies_ghz[1] - energies_ghz[0]) * ghz_to_w;
    let omega_a1 = (energies_ghz[a_index] - energies_ghz[1]) * ghz_to_w;
    let unit: T = lit(PLANCK * 1e9);

    Ok(SpectrumResult {
        energies: energies_ghz.iter().map(|&e| e * unit).collect(),
        level_map: LevelMap { zero: 0, one: 1, a: a_index },
        omega_a0: omega_a1 + omega_10,
        omega_a1,
        omega_10,
        flux_elements,
        mean_flux,
        lambda_check: LambdaCheck { valid, ranked_candidates: ranked },
        convergence: ConvergenceInfo {
            num_points: grid.num_points,
            relative_shift,
            max_boundary_tail,
        },
        grid: xs,
        wavefunctions,
    })
}

/// Samples U(Φ) = (Φ - Φ_x)²/2L - E_J cos(2πΦ/Φ₀) on the flux window
/// `Φ_x ± halfwidth` (endpoints included). Returns (Φ in Wb, U in J).
pub fn potential_profile<T: Real>(
    params: &SquidParams<T>,
    halfwidth: f64,
    samples: usize,
) -> Result<Vec<(T, T)>> {
    params.validate()?;
    if samples < 2 {
        return Err(invalid("samples", "need at least 2 samples"));
    }
    if !(halfwidth > 0.0) {
        return Err(invalid("halfwidth", "must be > 0"));
    }
    let hw: T = lit(halfwidth);
    let step = (hw + hw) / lit((samples - 1) as f64);
    let phi0: T = lit(FLUX_QUANTUM);
    Ok((0..samples)
        .map(|k| {
            let x = params.external_flux_ratio - hw + step * lit(k as f64);
            (x * phi0, params.potential(x))
        })
        .collect())
}
