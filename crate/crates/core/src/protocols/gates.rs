//! Single- and two-qubit gate matrices in the |0⟩-first basis.
//!
//! The Hadamard variants are printed in a column convention where
//! |0⟩ = (0,1)ᵀ; [`from_column_basis`] conjugates such matrices by σ_x.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, kron};
use crate::scalar::{cis, cplx, lit, re, CMat, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateLabel {
    H,
    HInv,
    Hbar,
    HbarInv,
    /// diag(e^{-iχπ/8}, e^{iχπ/8}).
    S,
    SigmaY,
    /// Two-qubit vacuum-sector evolution at γt = π/4.
    UJoint,
    CnotIdeal,
    Custom,
}

impl GateLabel {
    pub fn name(self) -> &'static str {
        match self {
            GateLabel::H => "H",
            GateLabel::HInv => "H_inv",
            GateLabel::Hbar => "Hbar",
            GateLabel::HbarInv => "Hbar_inv",
            GateLabel::S => "S",
            GateLabel::SigmaY => "sigma_y",
            GateLabel::UJoint => "U_I_II",
            GateLabel::CnotIdeal => "CNOT_ideal",
            GateLabel::Custom => "custom",
        }
    }
}

impl fmt::Display for GateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "H" => GateLabel::H,
            "H_inv" => GateLabel::HInv,
            "Hbar" => GateLabel::Hbar,
            "Hbar_inv" => GateLabel::HbarInv,
            "S" => GateLabel::S,
            "sigma_y" => GateLabel::SigmaY,
            "U_I_II" => GateLabel::UJoint,
            "CNOT_ideal" => GateLabel::CnotIdeal,
            "custom" => GateLabel::Custom,
            other => return Err(Error::UnknownGate(other.to_string())),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateMatrix<T: Real> {
    pub label: GateLabel,
    pub matrix: CMat<T>,
}

impl<T: Real> GateMatrix<T> {
    /// Wraps an arbitrary unitary.
    pub fn custom(matrix: CMat<T>) -> Result<Self> {
        let n = matrix.nrows();
        if !matrix.is_square() || !(n == 2 || n == 4) {
            return Err(Error::DimensionMismatch { expected: 2, actual: n });
        }
        if linalg::unitarity_defect(&matrix) > lit(1e-12) {
            return Err(Error::Verification("custom gate is not unitary".into()));
        }
        Ok(Self { label: GateLabel::Custom, matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

fn m2<T: Real>(a: [[(f64, f64); 2]; 2], scale: f64) -> CMat<T> {
    CMat::from_fn(2, 2, |r, c| cplx(lit(a[r][c].0 * scale), lit(a[r][c].1 * scale)))
}

/// H as printed, in the (|1⟩, |0⟩) column convention.
pub fn column_h<T: Real>() -> CMat<T> {
    m2([[(1.0, 0.0), (-1.0, 0.0)], [(1.0, 0.0), (1.0, 0.0)]], std::f64::consts::FRAC_1_SQRT_2)
}

/// H̄ as printed, in the (|1⟩, |0⟩) column convention.
pub fn column_hbar<T: Real>() -> CMat<T> {
    m2([[(1.0, 0.0), (0.0, -1.0)], [(0.0, -1.0), (1.0, 0.0)]], std::f64::consts::FRAC_1_SQRT_2)
}

pub fn pauli_x<T: Real>() -> CMat<T> {
    m2([[(0.0, 0.0), (1.0, 0.0)], [(1.0, 0.0), (0.0, 0.0)]], 1.0)
}

pub fn pauli_y<T: Real>() -> CMat<T> {
    m2([[(0.0, 0.0), (0.0, -1.0)], [(0.0, 1.0), (0.0, 0.0)]], 1.0)
}

/// Converts a single-qubit matrix from the |0⟩ = (0,1)ᵀ convention.
pub fn from_column_basis<T: Real>(m: &CMat<T>) -> CMat<T> {
    let x = pauli_x::<T>();
    &x * m * &x
}

/// diag(e^{-iχπ/8}, e^{iχπ/8}).
pub fn phase_s<T: Real>(chi: T) -> CMat<T> {
    let a = chi * T::pi() / lit(8.0);
    let mut m = CMat::zeros(2, 2);
    m[(0, 0)] = cis(-a);
    m[(1, 1)] = cis(a);
    m
}

/// diag(e^{-iφ}, e^{iφ}).
pub fn phase_gate<T: Real>(phi: T) -> CMat<T> {
    let mut m = CMat::zeros(2, 2);
    m[(0, 0)] = cis(-phi);
    m[(1, 1)] = cis(phi);
    m
}

/// Closed form of exp(-iH t) for the vacuum-sector two-qubit Hamiltonian
/// with γt given and γ′t = χ·γt.
pub fn joint_unitary<T: Real>(gamma_t: T, chi: T) -> CMat<T> {
    let ph = cis(-chi * gamma_t);
    let (c, s) = (gamma_t.cos(), gamma_t.sin());
    let mut u = CMat::zeros(4, 4);
    u[(0, 0)] = re(T::one());
    u[(1, 1)] = ph * c;
    u[(2, 2)] = ph * c;
    u[(1, 2)] = ph * cplx(T::zero(), -s);
    u[(2, 1)] = ph * cplx(T::zero(), -s);
    u[(3, 3)] = ph * ph;
    u
}

/// |i⟩|j⟩ → |i⟩|i⊕j⟩ with qubit I (first factor) as control.
pub fn cnot_ideal<T: Real>() -> CMat<T> {
    let mut m = CMat::zeros(4, 4);
    for (r, c) in [(0, 0), (1, 1), (3, 2), (2, 3)] {
        m[(r, c)] = re(T::one());
    }
    m
}

/// Gate matrix for `label` (χ enters S and the joint unitary only).
pub fn gate<T: Real>(label: GateLabel, chi: T) -> Result<GateMatrix<T>> {
    let matrix = match label {
        GateLabel::H => from_column_basis(&column_h::<T>()),
        GateLabel::HInv => from_column_basis(&column_h::<T>()).adjoint(),
        GateLabel::Hbar => from_column_basis(&column_hbar::<T>()),
        GateLabel::HbarInv => from_column_basis(&column_hbar::<T>()).adjoint(),
        GateLabel::S => phase_s(chi),
        GateLabel::SigmaY => pauli_y(),
        GateLabel::UJoint => joint_unitary(T::frac_pi_4(), chi),
        GateLabel::CnotIdeal => cnot_ideal(),
        GateLabel::Custom => return Err(Error::UnknownGate("custom gates need a matrix (GateMatrix::custom)".into())),
    };
    Ok(GateMatrix { label, matrix })
}

/// Embeds a single-qubit gate on `qubit` of an `n`-qubit register (qubit 0 most significant).
pub fn on_qubit<T: Real>(n: usize, qubit: usize, m: &CMat<T>) -> CMat<T> {
    let id = linalg::identity::<T>(2);
    let mut out = linalg::identity::<T>(1);
    for q in 0..n {
        out = kron(&out, if q == qubit { m } else { &id });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &CMat<f64>, b: &CMat<f64>) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn both_representations_are_pinned() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let ours_h = CMat::from_row_slice(2, 2, &[cplx(s, 0.0), cplx(s, 0.0), cplx(-s, 0.0), cplx(s, 0.0)]);
        assert!(close(&gate::<f64>(GateLabel::H, 0.0).unwrap().matrix, &ours_h));
        let printed_h = CMat::from_row_slice(2, 2, &[cplx(s, 0.0), cplx(-s, 0.0), cplx(s, 0.0), cplx(s, 0.0)]);
        assert!(close(&column_h(), &printed_h));
        let ours_hbar = CMat::from_row_slice(2, 2, &[cplx(s, 0.0), cplx(0.0, -s), cplx(0.0, -s), cplx(s, 0.0)]);
        assert!(close(&gate::<f64>(GateLabel::Hbar, 0.0).unwrap().matrix, &ours_hbar));
        // |0⟩ ↦ (|0⟩ - |1⟩)/√2 in both conventions
        let zero_ours = ours_h.column(0).into_owned();
        let zero_column = printed_h.column(1).into_owned();
        assert!((zero_ours[0] - zero_column[1]).norm() < 1e-15 && (zero_ours[1] - zero_column[0]).norm() < 1e-15);
    }

    #[test]
    fn inverses_and_unitarity() {
        let chi = -15.5;
        let id = linalg::identity::<f64>(2);
        for (a, b) in [(GateLabel::H, GateLabel::HInv), (GateLabel::Hbar, GateLabel::HbarInv)] {
            let p = gate::<f64>(a, chi).unwrap().matrix * gate::<f64>(b, chi).unwrap().matrix;
            assert!(close(&p, &id));
        }
        for l in [
            GateLabel::H,
            GateLabel::HInv,
            GateLabel::Hbar,
            GateLabel::HbarInv,
            GateLabel::S,
            GateLabel::SigmaY,
            GateLabel::UJoint,
            GateLabel::CnotIdeal,
        ] {
            assert!(linalg::unitarity_defect(&gate::<f64>(l, chi).unwrap().matrix) < 1e-12, "{l}");
        }
        assert!(close(&gate::<f64>(GateLabel::S, 0.0).unwrap().matrix, &id));
    }

    #[test]
    fn labels_parse_and_reject_unknown() {
        assert_eq!("Hbar_inv".parse::<GateLabel>().unwrap(), GateLabel::HbarInv);
        assert!(matches!("T".parse::<GateLabel>(), Err(Error::UnknownGate(_))));
        assert!(gate::<f64>(GateLabel::Custom, 0.0).is_err());
    }

    #[test]
    fn on_qubit_ordering() {
        let x = pauli_x::<f64>();
        let xi = on_qubit(2, 0, &x);
        // X on qubit I maps |01⟩ (index 1) to |11⟩ (index 3)
        assert_eq!(xi[(3, 1)], cplx(1.0, 0.0));
    }
}
