//! Fixed-size 4×4 kernel: the symplectic form, the matrix exponential,
//! commutators and coordinates on the 10-dimensional algebra sp₂(ℝ).
//!
//! Block conventions follow the phase-space ordering `(u₁, u₂, u₁', u₂')`,
//! so `J = [[0, -I], [I, 0]]` and sp₂(ℝ) consists of `[[a, b₁], [b₂, -aᵀ]]`
//! with `b₁`, `b₂` symmetric.

use std::ops::Mul;

use nalgebra::{Matrix4, Vector4};

use crate::error::{Error, Result};

pub type Mat4 = Matrix4<f64>;

/// Dimension of sp₂(ℝ).
pub const SP2_DIM: usize = 10;

/// Tolerance used when admitting a matrix as a [`SympMat4`].
pub const SYMPLECTIC_TOL: f64 = 1e-9;

pub fn symplectic_form() -> Mat4 {
    let mut j = Mat4::zeros();
    j[(0, 2)] = -1.0;
    j[(1, 3)] = -1.0;
    j[(2, 0)] = 1.0;
    j[(3, 1)] = 1.0;
    j
}

/// Largest absolute entry.
pub fn max_abs(m: &Mat4) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn is_finite(m: &Mat4) -> bool {
    m.iter().all(|x| x.is_finite())
}

fn require_finite(m: &Mat4, what: &str) -> Result<()> {
    if is_finite(m) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} has non-finite entries")))
    }
}

/// `‖ᵗmJm − J‖_max ≤ tol · max(1, ‖m‖_max²)`.
pub fn is_symplectic(m: &Mat4, tol: f64) -> Result<bool> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    require_finite(m, "matrix")?;
    Ok(symplectic_defect(m) <= tol * max_abs(m).powi(2).max(1.0))
}

/// `‖ᵗmJm − J‖_max`, unscaled.
pub fn symplectic_defect(m: &Mat4) -> f64 {
    let j = symplectic_form();
    max_abs(&(m.transpose() * j * m - j))
}

/// A real 4×4 matrix with `ᵗMJM = J`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SympMat4(Mat4);

impl SympMat4 {
    pub fn new(m: Mat4) -> Result<Self> {
        if !is_symplectic(&m, SYMPLECTIC_TOL)? {
            return Err(Error::InvalidInput(format!(
                "matrix is not symplectic (defect {:e})",
                symplectic_defect(&m)
            )));
        }
        let det = m.determinant();
        if (det - 1.0).abs() > SYMPLECTIC_TOL * max_abs(&m).powi(4).max(1.0) {
            return Err(Error::InvalidInput(format!(
                "symplectic matrix with determinant {det}"
            )));
        }
        Ok(SympMat4(m))
    }

    /// Wraps a matrix known to be symplectic by construction. Checked in debug builds.
    pub(crate) fn from_trusted(m: Mat4) -> Self {
        debug_assert!(
            symplectic_defect(&m) <= SYMPLECTIC_TOL * max_abs(&m).powi(2).max(1.0),
            "not symplectic: {m}"
        );
        SympMat4(m)
    }

    pub fn identity() -> Self {
        SympMat4(Mat4::identity())
    }

    pub fn as_mat(&self) -> &Mat4 {
        &self.0
    }

    pub fn into_inner(self) -> Mat4 {
        self.0
    }

    /// `M⁻¹ = J⁻¹ ᵗM J`, exact for symplectic `M`.
    pub fn inverse(&self) -> Self {
        let j = symplectic_form();
        SympMat4(-(j * self.0.transpose() * j))
    }
}

impl Mul for SympMat4 {
    type Output = SympMat4;

    fn mul(self, rhs: SympMat4) -> SympMat4 {
        SympMat4(self.0 * rhs.0)
    }
}

impl From<SympMat4> for Mat4 {
    fn from(m: SympMat4) -> Mat4 {
        m.0
    }
}

// Degree 3..13 diagonal Padé coefficients and the backward-error thresholds
// for the 1-norm (Higham 2005).
const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
#[allow(clippy::excessive_precision)]
const THETA: [(f64, usize); 4] = [
    (1.495585217958292e-2, 3),
    (2.539398330063230e-1, 5),
    (9.504178996162932e-1, 7),
    (2.097847961257068e0, 9),
];
const THETA13: f64 = 5.371920351148152;

fn norm1(m: &Mat4) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn pade_low(a: &Mat4, b: &[f64]) -> (Mat4, Mat4) {
    let id = Mat4::identity();
    let a2 = a * a;
    let mut power = id;
    let mut u = Mat4::zeros();
    let mut v = Mat4::zeros();
    for k in 0..b.len() / 2 {
        u += power * b[2 * k + 1];
        v += power * b[2 * k];
        power *= a2;
    }
    (a * u, v)
}

fn pade13(a: &Mat4) -> (Mat4, Mat4) {
    let b = &PADE13;
    let id = Mat4::identity();
    let a2 = a * a;
    let a4 = a2 * a2;
    let a6 = a4 * a2;
    let u_inner = a6 * (a6 * b[13] + a4 * b[11] + a2 * b[9]) + a6 * b[7] + a4 * b[5] + a2 * b[3]
        + id * b[1];
    let v = a6 * (a6 * b[12] + a4 * b[10] + a2 * b[8]) + a6 * b[6] + a4 * b[4] + a2 * b[2]
        + id * b[0];
    (a * u_inner, v)
}

/// Matrix exponential by scaling and squaring with a diagonal Padé approximant
/// of degree up to 13.
pub fn expm(m: &Mat4) -> Result<Mat4> {
    require_finite(m, "expm argument")?;
    let norm = norm1(m);
    let (squarings, (u, v)) = match THETA.iter().find(|(theta, _)| norm <= *theta) {
        Some(&(_, degree)) => {
            let coeffs: &[f64] = match degree {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            (0, pade_low(m, coeffs))
        }
        None => {
            let s = (norm / THETA13).log2().ceil().max(0.0) as i32;
            if s > 1000 {
                return Err(Error::Range(format!("expm argument norm {norm:e} too large")));
            }
            (s, pade13(&(m / 2f64.powi(s))))
        }
    };
    let denom = v - u;
    let lu = denom.lu();
    let mut r = lu
        .solve(&(v + u))
        .ok_or_else(|| Error::Range("singular Padé denominator in expm".into()))?;
    for _ in 0..squarings {
        r = r * r;
    }
    if !is_finite(&r) {
        return Err(Error::Range(format!(
            "expm overflowed (argument 1-norm {norm:e})"
        )));
    }
    Ok(r)
}

/// `xy − yx`.
pub fn bracket(x: &Mat4, y: &Mat4) -> Mat4 {
    x * y - y * x
}

/// Elementary matrix with a single 1 at zero-based `(i, j)`.
pub fn unit(i: usize, j: usize) -> Mat4 {
    let mut m = Mat4::zeros();
    m[(i, j)] = 1.0;
    m
}

/// Orthonormal (Frobenius) basis of sp₂(ℝ), in this fixed order:
///
/// | idx | block | element |
/// |-----|-------|---------|
/// | 0 | a   | `(e₁₁ − e₃₃)/√2`          (a = E₁₁) |
/// | 1 | a   | `(e₁₂ − e₄₃)/√2`          (a = E₁₂) |
/// | 2 | a   | `(e₂₁ − e₃₄)/√2`          (a = E₂₁) |
/// | 3 | a   | `(e₂₂ − e₄₄)/√2`          (a = E₂₂) |
/// | 4 | b₁  | `e₁₃` |
/// | 5 | b₁  | `e₂₄` |
/// | 6 | b₁  | `(e₁₄ + e₂₃)/√2` |
/// | 7 | b₂  | `e₃₁` |
/// | 8 | b₂  | `e₄₂` |
/// | 9 | b₂  | `(e₃₂ + e₄₁)/√2` |
///
/// (`eᵢⱼ` is one-based here.)
pub fn sp2_basis() -> [Mat4; SP2_DIM] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [
        (unit(0, 0) - unit(2, 2)) * h,
        (unit(0, 1) - unit(3, 2)) * h,
        (unit(1, 0) - unit(2, 3)) * h,
        (unit(1, 1) - unit(3, 3)) * h,
        unit(0, 2),
        unit(1, 3),
        (unit(0, 3) + unit(1, 2)) * h,
        unit(2, 0),
        unit(3, 1),
        (unit(2, 1) + unit(3, 0)) * h,
    ]
}

/// Coordinates in the basis of [`sp2_basis`]. Since the basis is orthonormal,
/// Euclidean geometry on coordinates equals Frobenius geometry on matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sp2Coords(pub [f64; SP2_DIM]);

impl Sp2Coords {
    pub fn zeros() -> Self {
        Sp2Coords([0.0; SP2_DIM])
    }

    pub fn to_matrix(&self) -> Mat4 {
        sp2_basis()
            .iter()
            .zip(self.0.iter())
            .fold(Mat4::zeros(), |acc, (b, c)| acc + b * *c)
    }

    pub fn dot(&self, other: &Sp2Coords) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub(crate) fn axpy(&mut self, alpha: f64, x: &Sp2Coords) {
        for (a, b) in self.0.iter_mut().zip(x.0.iter()) {
            *a += alpha * b;
        }
    }

    pub(crate) fn scale(&mut self, alpha: f64) {
        for a in self.0.iter_mut() {
            *a *= alpha;
        }
    }
}

/// Orthogonal projection onto sp₂(ℝ) with the Frobenius norm of the rejected part.
pub fn sp2_project(m: &Mat4) -> (Sp2Coords, f64) {
    let basis = sp2_basis();
    let mut coords = [0.0; SP2_DIM];
    for (c, b) in coords.iter_mut().zip(basis.iter()) {
        *c = m.dot(b);
    }
    let coords = Sp2Coords(coords);
    let residual = (m - coords.to_matrix()).norm();
    (coords, residual)
}

/// An element `[[a, b₁], [b₂, −ᵗa]]` of sp₂(ℝ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sp2AlgebraElement(Mat4);

impl Sp2AlgebraElement {
    pub const TOL: f64 = 1e-10;

    pub fn new(m: Mat4) -> Result<Self> {
        require_finite(&m, "algebra element")?;
        let scale = max_abs(&m).max(1.0);
        let a = m.fixed_view::<2, 2>(0, 0);
        let b1 = m.fixed_view::<2, 2>(0, 2);
        let b2 = m.fixed_view::<2, 2>(2, 0);
        let d = m.fixed_view::<2, 2>(2, 2);
        let defects = [
            (b1 - b1.transpose()).amax(),
            (b2 - b2.transpose()).amax(),
            (d + a.transpose()).amax(),
        ];
        if defects.iter().any(|&x| x > Self::TOL * scale) {
            return Err(Error::InvalidInput(format!(
                "matrix is not in sp2(R) (block defects {defects:?})"
            )));
        }
        Ok(Sp2AlgebraElement(m))
    }

    pub fn as_mat(&self) -> &Mat4 {
        &self.0
    }

    pub fn coords(&self) -> Sp2Coords {
        sp2_project(&self.0).0
    }
}

impl From<Sp2Coords> for Sp2AlgebraElement {
    fn from(c: Sp2Coords) -> Self {
        Sp2AlgebraElement(c.to_matrix())
    }
}

pub fn vec4(a: f64, b: f64, c: f64, d: f64) -> Vector4<f64> {
    Vector4::new(a, b, c, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(a: f64, b: f64, c: f64, d: f64) -> Mat4 {
        Mat4::from_diagonal(&vec4(a, b, c, d))
    }

    fn interface(q1: f64, q2: f64) -> Mat4 {
        let mut m = Mat4::identity();
        m[(2, 0)] = q1;
        m[(3, 1)] = q2;
        m
    }

    #[test]
    fn symplectic_examples() {
        assert!(is_symplectic(&symplectic_form(), 1e-12).unwrap());
        assert!(is_symplectic(&interface(3.0, -1.0), 1e-12).unwrap());
        assert!(!is_symplectic(&diag(2.0, 1.0, 1.0, 1.0), 1e-9).unwrap());
    }

    #[test]
    fn is_symplectic_rejects_bad_input() {
        let mut m = Mat4::identity();
        m[(1, 2)] = f64::NAN;
        assert!(matches!(is_symplectic(&m, 1e-9), Err(Error::InvalidInput(_))));
        assert!(is_symplectic(&Mat4::identity(), 0.0).is_err());
    }

    #[test]
    fn symp_inverse_is_inverse() {
        let m = SympMat4::new(interface(0.3, -2.0) * symplectic_form()).unwrap();
        let prod = *(m * m.inverse()).as_mat();
        assert!((prod - Mat4::identity()).amax() < 1e-14);
        assert!(SympMat4::new(diag(2.0, 1.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn expm_of_zero_and_diagonal() {
        assert_eq!(expm(&Mat4::zeros()).unwrap(), Mat4::identity());
        let (a, b) = (1.3, -0.4);
        let got = expm(&diag(a, b, -a, -b)).unwrap();
        let want = diag(a.exp(), b.exp(), (-a).exp(), (-b).exp());
        for (g, w) in got.iter().zip(want.iter()) {
            assert!((g - w).abs() <= 1e-14 * w.abs().max(1.0), "{g} vs {w}");
        }
    }

    #[test]
    fn expm_matches_taylor_series_on_small_argument() {
        // Low-degree Padé branches; compare to a long Taylor sum.
        let mut x = Mat4::zeros();
        x[(0, 1)] = 0.01;
        x[(2, 3)] = -0.002;
        x[(1, 0)] = 0.004;
        for scale in [1.0, 10.0, 50.0, 150.0] {
            let y = x * scale;
            let mut term = Mat4::identity();
            let mut sum = Mat4::identity();
            for k in 1..60 {
                term = term * y / k as f64;
                sum += term;
            }
            let got = expm(&y).unwrap();
            assert!((got - sum).amax() < 1e-15 * sum.amax().max(1.0));
        }
    }

    #[test]
    fn expm_rotation_generator() {
        // exp([[0, 1], [-r², 0]] t) has the closed form cos / sin.
        let r: f64 = 2.5;
        let mut g = Mat4::zeros();
        g[(0, 2)] = 1.0;
        g[(2, 0)] = -r * r;
        g[(1, 3)] = 1.0;
        g[(3, 1)] = r * r;
        let e = expm(&g).unwrap();
        assert!((e[(0, 0)] - r.cos()).abs() < 1e-13);
        assert!((e[(0, 2)] - r.sin() / r).abs() < 1e-13);
        assert!((e[(2, 0)] + r * r.sin()).abs() < 1e-13);
        assert!((e[(1, 1)] - r.cosh()).abs() < 1e-13 * r.cosh());
        assert!((e[(3, 1)] - r * r.sinh()).abs() < 1e-13 * r.cosh());
    }

    #[test]
    fn expm_rejects_non_finite() {
        let mut m = Mat4::zeros();
        m[(0, 0)] = f64::INFINITY;
        assert!(expm(&m).is_err());
        assert!(matches!(expm(&(Mat4::identity() * 1e6)), Err(Error::Range(_))));
    }

    #[test]
    fn half_bracket_of_b0_and_a2_is_minus_e42() {
        let b0 = unit(0, 1) - unit(3, 2);
        let a2 = unit(2, 1) + unit(3, 0);
        let b = bracket(&b0, &a2) * 0.5;
        assert_eq!(b, -unit(3, 1));
    }

    #[test]
    fn basis_is_orthonormal_and_in_algebra() {
        let basis = sp2_basis();
        for (i, x) in basis.iter().enumerate() {
            Sp2AlgebraElement::new(*x).unwrap();
            for (j, y) in basis.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((x.dot(y) - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn projection_examples() {
        let (c, r) = sp2_project(&Mat4::zeros());
        assert_eq!(c, Sp2Coords::zeros());
        assert_eq!(r, 0.0);

        // e12 alone: its a-part (e12 − e43)/√2 is kept with coefficient 1/√2,
        // leaving (e12 + e43)/2 of Frobenius norm 1/√2.
        let (c, r) = sp2_project(&unit(0, 1));
        assert!((c.0[1] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((r - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);

        let (_, r) = sp2_project(&diag(1.0, 0.0, -1.0, 0.0));
        assert!(r < 1e-15);
    }

    #[test]
    fn algebra_element_validation() {
        assert!(Sp2AlgebraElement::new(unit(0, 1)).is_err());
        assert!(Sp2AlgebraElement::new(unit(0, 1) - unit(3, 2)).is_ok());
        assert!(Sp2AlgebraElement::new(unit(0, 3)).is_err());
        assert!(Sp2AlgebraElement::new(unit(0, 3) + unit(1, 2)).is_ok());
    }
}
