//! Second exterior power of ℝ⁴.
//!
//! ∧²ℝ⁴ is six-dimensional; coordinates use the lexicographic basis
//! `e₁∧e₂, e₁∧e₃, e₁∧e₄, e₂∧e₃, e₂∧e₄, e₃∧e₄`. With this basis the scalar
//! product `(u₁∧u₂, v₁∧v₂) = det(⟨uᵢ, vⱼ⟩)` is the Euclidean one on coordinates.

use nalgebra::{DMatrix, SMatrix, SVector, Vector4};

use crate::error::{Error, Result};
use crate::symplectic::Mat4;

pub type Wedge2Vector = SVector<f64, 6>;
pub type Wedge2Matrix = SMatrix<f64, 6, 6>;

/// Index pairs of the lexicographic basis (zero-based).
pub const WEDGE2_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// ∧²m: entry `(I, K)` is the 2×2 minor of `m` on rows `I = (i, j)` and columns `K = (k, l)`.
pub fn wedge2(m: &Mat4) -> Wedge2Matrix {
    Wedge2Matrix::from_fn(|r, c| {
        let (i, j) = WEDGE2_PAIRS[r];
        let (k, l) = WEDGE2_PAIRS[c];
        m[(i, k)] * m[(j, l)] - m[(i, l)] * m[(j, k)]
    })
}

/// Coordinates of `u ∧ v`.
pub fn wedge_of(u: &Vector4<f64>, v: &Vector4<f64>) -> Wedge2Vector {
    Wedge2Vector::from_fn(|r, _| {
        let (i, j) = WEDGE2_PAIRS[r];
        u[i] * v[j] - u[j] * v[i]
    })
}

/// The bivector `e₁∧e₃ + e₂∧e₄` dual to the symplectic form; fixed by ∧²M for every symplectic M.
pub fn symplectic_bivector() -> Wedge2Vector {
    Wedge2Vector::from_column_slice(&[0.0, 1.0, 0.0, 0.0, 1.0, 0.0])
}

/// `(u₁∧…∧u_p, v₁∧…∧v_p) = det(⟨uᵢ, vⱼ⟩)`.
pub fn wedge_inner(u: &[Vector4<f64>], v: &[Vector4<f64>]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::InvalidInput(format!(
            "p-vectors of different degree ({} and {})",
            u.len(),
            v.len()
        )));
    }
    let p = u.len();
    if !(1..=4).contains(&p) {
        return Err(Error::InvalidInput(format!("degree p = {p} not in 1..=4")));
    }
    let gram = DMatrix::from_fn(p, p, |i, j| u[i].dot(&v[j]));
    Ok(gram.determinant())
}

/// Canonical element of the p-Lagrangian, used as start vector of the wedge estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LagrangianSeed {
    Vector(Vector4<f64>),
    Bivector(Wedge2Vector),
}

/// `e₁` for `p = 1`, `e₁∧e₂` for `p = 2`.
pub fn lagrangian_seed(p: usize) -> Result<LagrangianSeed> {
    match p {
        1 => Ok(LagrangianSeed::Vector(Vector4::new(1.0, 0.0, 0.0, 0.0))),
        2 => Ok(LagrangianSeed::Bivector(Wedge2Vector::from_column_slice(&[
            1.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        ]))),
        _ => Err(Error::InvalidInput(format!(
            "Lagrangian seeds exist here only for p in {{1, 2}}, got {p}"
        ))),
    }
}
