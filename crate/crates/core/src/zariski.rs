//! Lie-algebra certificates of Zariski density.
//!
//! If the Lie algebra generated by a set of elements of the Zariski closure of
//! the transfer-matrix group is all of sp₂(ℝ) (dimension 10), the group is
//! Zariski dense in Sp₂(ℝ) and the Lyapunov spectrum is simple and positive.
//! This module builds explicit elements of that algebra for both models,
//! closes them under brackets numerically, and evaluates determinant
//! certificates whose zeros are the candidate exceptional energies.
//!
//! Point-interaction seeds live in the frame where `V₀` is diagonal. With
//! `R = R_{α,β}` the free channel cell and `N(K) = [[0, 0], [K, 0]]`,
//!
//! ```text
//! S(l, K) = Rˡ N(K) R⁻ˡ,   A₁(l) = S(l, I),   A₂(l) = S(l, [[0,1],[1,0]]),
//! B = ½ [e₁₂ − e₄₃, A₂(0)].
//! ```
//!
//! Two minors built from entries of these seeds give the certificates
//! `det11`/`det12` (`E > 1`), `det21`/`det22` (`−1 < E < 1`) and
//! `det31`/`det32` (`E < −1`), all evaluated in closed form.
//!
//! Anderson seeds `C₁…C₁₀` (`E > 2`) are built from limits of powers of the
//! single-site transfer matrices for the atoms `(0,0)`, `(1,1)` and `(1,0)`.
//! Their tracked-entry determinant (`m2step6`) turns out to vanish
//! identically, so the Anderson certificate uses the rank margin of seeds and
//! first-level brackets instead; the Lie closure itself is unaffected.

use nalgebra::{DMatrix, Matrix2, SMatrix, SymmetricEigen};
use twofloat::TwoFloat;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::models::{
    anderson_cell, anderson_eigen, block_frame, ChannelPropagator, ModelKind, ModelSpec,
    PointRegime,
};
use crate::symplectic::{bracket, sp2_project, unit, Mat4, Sp2Coords, SP2_DIM};

pub const DEFAULT_CLOSURE_TOL: f64 = 1e-8;
pub const DEFAULT_SCAN_POINTS: usize = 10_000;
/// `|2 r sin r cos r|` below this makes the normalization of `C₃…C₆` degenerate.
pub const DIVISOR_TOL: f64 = 1e-10;
/// A non-sign-changing dip is a suspected double root when `|f|` at the
/// refined minimum is below this fraction of its grid neighbours.
pub const DIP_RATIO: f64 = 1e-8;
/// Relative size under which `m2step6` is treated as identically zero.
const VANISHING_RATIO: f64 = 1e-10;

/// Subspace of sp₂(ℝ) with an orthonormal basis in [`Sp2Coords`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LieSubspace {
    basis: Vec<Sp2Coords>,
}

impl LieSubspace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Sp2Coords] {
        &self.basis
    }

    /// Norm of the component of `c` orthogonal to the subspace.
    pub fn residual(&self, c: &Sp2Coords) -> f64 {
        let mut v = *c;
        for _ in 0..2 {
            for b in &self.basis {
                v.axpy(-b.dot(&v), b);
            }
        }
        v.norm()
    }

    fn admit(&mut self, c: &Sp2Coords, tol: f64) -> bool {
        if self.basis.len() == SP2_DIM {
            return false;
        }
        let mut v = *c;
        for _ in 0..2 {
            for b in &self.basis {
                v.axpy(-b.dot(&v), b);
            }
        }
        let n = v.norm();
        if n > tol {
            v.scale(1.0 / n);
            self.basis.push(v);
            true
        } else {
            false
        }
    }
}

/// Lie algebra generated by `seeds` inside sp₂(ℝ).
///
/// Seeds are normalized to unit Frobenius norm, so a direction is new when its
/// orthogonal residual exceeds `tol` times the (unit) seed scale. Brackets of
/// basis pairs are adjoined until a full sweep adds nothing.
pub fn lie_closure(seeds: &[Mat4], tol: f64) -> Result<LieSubspace> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidInput(format!("closure tolerance {tol} not in (0, 1)")));
    }
    let mut space = LieSubspace::default();
    for (index, s) in seeds.iter().enumerate() {
        if s.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!("seed {index} is not finite")));
        }
        let n = s.norm();
        if n == 0.0 {
            continue;
        }
        let (mut c, residual) = sp2_project(s);
        if residual > tol * n {
            return Err(Error::InvalidSeed {
                index,
                residual: residual / n,
                limit: tol,
            });
        }
        c.scale(1.0 / n);
        space.admit(&c, tol);
    }
    loop {
        let mut grew = false;
        let mut i = 0;
        while i < space.dim() {
            let mut j = i + 1;
            while j < space.dim() {
                let br = bracket(&space.basis[i].to_matrix(), &space.basis[j].to_matrix());
                grew |= space.admit(&sp2_project(&br).0, tol);
                if space.dim() == SP2_DIM {
                    return Ok(space);
                }
                j += 1;
            }
            i += 1;
        }
        if !grew {
            return Ok(space);
        }
    }
}

// ---------------------------------------------------------------------------
// Point-interaction model

fn point_channels(energy: f64, len: f64) -> Result<(ChannelPropagator, ChannelPropagator)> {
    PointRegime::of(energy)?;
    match (
        ChannelPropagator::new(1.0 - energy, len),
        ChannelPropagator::new(-1.0 - energy, len),
    ) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(Error::BranchPoint {
            energy,
            what: "E = ±1 for the point-interaction model",
        }),
    }
}

/// `S(l, K) = Rˡ [[0, 0], [K, 0]] R⁻ˡ` in closed form.
pub fn conjugated_nilpotent(energy: f64, l: u32, k: &Matrix2<f64>) -> Result<Mat4> {
    let (a, b) = point_channels(energy, l as f64)?;
    let c = Matrix2::new(a.c, 0.0, 0.0, b.c);
    let s = Matrix2::new(a.s, 0.0, 0.0, b.s);
    let mut m = Mat4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(&(s * k * c));
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(&(-s * k * s));
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(&(c * k * c));
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(&(-c * k * s));
    Ok(m)
}

pub fn model1_a1(energy: f64, l: u32) -> Result<Mat4> {
    conjugated_nilpotent(energy, l, &Matrix2::identity())
}

pub fn model1_a2(energy: f64, l: u32) -> Result<Mat4> {
    conjugated_nilpotent(energy, l, &Matrix2::new(0.0, 1.0, 1.0, 0.0))
}

/// `½ [e₁₂ − e₄₃, A₂(0)]`; equals `−e₄₂`.
pub fn model1_b() -> Mat4 {
    let b0 = unit(0, 1) - unit(3, 2);
    let a20 = unit(2, 1) + unit(3, 0);
    bracket(&b0, &a20) * 0.5
}

/// `A₁(0..4), A₂(0..3), B` in the diagonal-`V₀` frame.
pub fn model1_seeds(energy: f64) -> Result<Vec<Mat4>> {
    let mut seeds = Vec::with_capacity(10);
    for l in 0..5 {
        seeds.push(model1_a1(energy, l)?);
    }
    for l in 0..4 {
        seeds.push(model1_a2(energy, l)?);
    }
    seeds.push(model1_b());
    Ok(seeds)
}

/// Columns `(A₂(l)₃₂, A₂(l)₁₄, A₂(l)₁₂, A₂(l)₂₁)` for `l = 0..3` (one-based entries).
pub fn a2_minor_matrix(energy: f64) -> Result<SMatrix<f64, 4, 4>> {
    let mut m = SMatrix::<f64, 4, 4>::zeros();
    for l in 0..4 {
        let a = model1_a2(energy, l)?;
        let col = [a[(2, 1)], a[(0, 3)], a[(0, 1)], a[(1, 0)]];
        m.set_column(l as usize, &col.into());
    }
    Ok(m)
}

/// Columns `(X₃₁, X₄₂, X₁₁, X₂₂, X₁₃, X₂₄)` for `X = A₁(0..4), B` (one-based entries).
pub fn a1b_minor_matrix(energy: f64) -> Result<SMatrix<f64, 6, 6>> {
    let mut m = SMatrix::<f64, 6, 6>::zeros();
    let mut cols = Vec::with_capacity(6);
    for l in 0..5 {
        cols.push(model1_a1(energy, l)?);
    }
    cols.push(model1_b());
    for (j, x) in cols.iter().enumerate() {
        let col = [x[(2, 0)], x[(3, 1)], x[(0, 0)], x[(1, 1)], x[(0, 2)], x[(1, 3)]];
        m.set_column(j, &col.into());
    }
    Ok(m)
}

/// Closed forms of the two minors. With `s = sin(α)/α` (or `sinh`) and
/// `c = cos α` (or `cosh`) per channel:
///
/// ```text
/// first  =  4 s_a² s_b² (c_a² − c_b²)
/// second = 64 s_a³ s_b³ c_a c_b (c_a² − c_b²)²
/// ```
pub fn det_certificates_model1(energy: f64) -> Result<(f64, f64)> {
    let (a, b) = point_channels(energy, 1.0)?;
    let gap = a.c * a.c - b.c * b.c;
    let first = 4.0 * (a.s * b.s).powi(2) * gap;
    let second = 64.0 * (a.s * b.s).powi(3) * a.c * b.c * gap * gap;
    Ok((first, second))
}

/// Determinant by partially pivoted elimination in double-double arithmetic.
///
/// The certificate minors mix rows of very different magnitude and their
/// determinant is much smaller than the Hadamard bound, so f64 LU loses up to
/// ~10⁻⁹ relative; with ~32 significant digits only the rounding of the
/// entries themselves remains.
pub fn precise_determinant<const N: usize>(m: &SMatrix<f64, N, N>) -> f64 {
    let mut a: Vec<Vec<TwoFloat>> = (0..N)
        .map(|i| (0..N).map(|j| TwoFloat::from(m[(i, j)])).collect())
        .collect();
    let mut det = TwoFloat::from(1.0);
    for k in 0..N {
        let p = (k..N)
            .max_by(|x, y| f64::from(a[*x][k]).abs().total_cmp(&f64::from(a[*y][k]).abs()))
            .unwrap_or(k);
        if f64::from(a[p][k]) == 0.0 {
            return 0.0;
        }
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        let pivot = a[k][k];
        det *= pivot;
        for i in k + 1..N {
            let f = a[i][k] / pivot;
            for j in k + 1..N {
                let t = a[k][j] * f;
                a[i][j] -= t;
            }
        }
    }
    f64::from(det)
}

/// Product of column norms; bounds `|det|` (Hadamard).
pub fn hadamard_scale<const N: usize>(m: &SMatrix<f64, N, N>) -> f64 {
    m.column_iter().map(|c| c.norm()).product()
}

// ---------------------------------------------------------------------------
// Anderson model

/// The four rates `(α₁, α₂, β₁, β₂) = (√(E−1), √(E+1), √(E−2), √E)` of the
/// atoms `(0,0)` and `(1,1)`.
pub fn anderson_rates(energy: f64) -> [f64; 4] {
    [
        (energy - 1.0).sqrt(),
        (energy + 1.0).sqrt(),
        (energy - 2.0).sqrt(),
        energy.sqrt(),
    ]
}

fn require_anderson_regime(energy: f64) -> Result<()> {
    if energy.is_finite() && energy > 2.0 {
        Ok(())
    } else {
        Err(Error::OutOfRegime {
            energy,
            regime: "E > 2 for the Anderson certificate",
        })
    }
}

/// Divisor `2 r sin r cos r` of the normalization of `C₃…C₆`.
pub fn normalization_divisor(r: f64) -> f64 {
    2.0 * r * r.sin() * r.cos()
}

const DIVISOR_NAMES: [&str; 4] = ["C3 (alpha1)", "C4 (beta1)", "C5 (alpha2)", "C6 (beta2)"];

/// Seeds `C₁…C₁₀` with any degenerate normalizations left out and named.
struct AndersonSeedSet {
    seeds: Vec<Mat4>,
    degenerate: Vec<(&'static str, f64)>,
    tracked: SMatrix<f64, 4, 4>,
}

fn anderson_frame(omega: [f64; 2]) -> Mat4 {
    block_frame(&anderson_eigen(omega).s)
}

fn anderson_seed_set(energy: f64) -> Result<AndersonSeedSet> {
    require_anderson_regime(energy)?;
    let r00 = anderson_frame([0.0, 0.0]);
    let r10 = anderson_frame([1.0, 0.0]);
    let in_frame = |m: Mat4| r00 * m * r00.transpose();
    let diag = |d: [f64; 4]| Mat4::from_diagonal(&d.into());

    let c1 = in_frame(diag([1.0, 0.0, -1.0, 0.0]));
    let c2 = in_frame(diag([0.0, 1.0, 0.0, -1.0]));
    let a00 = anderson_cell(energy, [0.0, 0.0], 1.0)?;
    let a11 = anderson_cell(energy, [1.0, 1.0], 1.0)?;
    let [al1, al2, be1, be2] = anderson_rates(energy);

    let mut seeds = vec![c1, c2];
    let mut degenerate = Vec::new();
    let jobs = [(c1, &a00, al1), (c1, &a11, be1), (c2, &a00, al2), (c2, &a11, be2)];
    for ((c, a, r), name) in jobs.into_iter().zip(DIVISOR_NAMES) {
        let divisor = normalization_divisor(r);
        if divisor.abs() < DIVISOR_TOL {
            degenerate.push((name, divisor));
            continue;
        }
        let moved = a.as_mat() * c * a.inverse().as_mat();
        seeds.push((moved - c * (2.0 * r).cos()) / -(2.0 * r).sin());
    }

    let eig10 = anderson_eigen([1.0, 0.0]);
    let alpha = (energy - eig10.lambda[0]).sqrt();
    let beta = (energy - eig10.lambda[1]).sqrt();
    let mut m1 = Mat4::zeros();
    m1[(0, 2)] = 1.0 / alpha;
    m1[(1, 1)] = 1.0;
    m1[(2, 0)] = -alpha;
    m1[(3, 3)] = 1.0;
    let mut m2 = Mat4::zeros();
    m2[(0, 0)] = 1.0;
    m2[(1, 3)] = 1.0 / beta;
    m2[(2, 2)] = 1.0;
    m2[(3, 1)] = -beta;
    let m1 = r10 * m1 * r10.transpose();
    let m2 = r10 * m2 * r10.transpose();
    let m1_inv = m1.try_inverse().ok_or_else(|| Error::Range("M1 is singular".into()))?;
    let m2_inv = m2.try_inverse().ok_or_else(|| Error::Range("M2 is singular".into()))?;

    let xs = [
        (&m1, &m1_inv, in_frame(unit(2, 0))),
        (&m1, &m1_inv, in_frame(unit(3, 1))),
        (&m2, &m2_inv, in_frame(unit(0, 2))),
        (&m2, &m2_inv, in_frame(unit(1, 3))),
    ];
    let mut tracked = SMatrix::<f64, 4, 4>::zeros();
    for (j, (m, m_inv, x)) in xs.into_iter().enumerate() {
        let c = m * x * m_inv;
        let t = r00.transpose() * c * r00;
        let col = [t[(0, 1)], t[(1, 0)], t[(2, 1)], t[(1, 2)]];
        tracked.set_column(j, &col.into());
        seeds.push(c);
    }
    Ok(AndersonSeedSet {
        seeds,
        degenerate,
        tracked,
    })
}

/// `C₁…C₁₀` for the Anderson model at `E > 2`.
pub fn model2_seeds(energy: f64) -> Result<Vec<Mat4>> {
    let set = anderson_seed_set(energy)?;
    if let Some(&(what, divisor)) = set.degenerate.first() {
        return Err(Error::DegenerateEnergy {
            energy,
            divisor,
            what,
        });
    }
    Ok(set.seeds)
}

/// Tracked entries `(0,1), (1,0), (2,1), (1,2)` (zero-based, `R₍₀,₀₎` frame) of
/// `C₇…C₁₀`, one column per seed.
pub fn model2_tracked_entries(energy: f64) -> Result<SMatrix<f64, 4, 4>> {
    Ok(anderson_seed_set(energy)?.tracked)
}

/// Direct determinant of [`model2_tracked_entries`].
pub fn det_certificate_model2(energy: f64) -> Result<f64> {
    Ok(precise_determinant(&model2_tracked_entries(energy)?))
}

/// `√(λ_min / λ_max)` of the frame operator `Σ v vᵀ` of the unit-normalized
/// seeds and all their pairwise brackets; zero iff they fail to span sp₂(ℝ).
pub fn rank_margin(seeds: &[Mat4]) -> f64 {
    let mut vectors: Vec<Sp2Coords> = Vec::new();
    let mut push = |m: &Mat4| {
        let (mut c, _) = sp2_project(m);
        let n = c.norm();
        if n > 0.0 {
            c.scale(1.0 / n);
            vectors.push(c);
        }
    };
    for s in seeds {
        push(s);
    }
    for i in 0..seeds.len() {
        for j in i + 1..seeds.len() {
            push(&bracket(&seeds[i], &seeds[j]));
        }
    }
    let mut frame = SMatrix::<f64, SP2_DIM, SP2_DIM>::zeros();
    for v in &vectors {
        let col = SMatrix::<f64, SP2_DIM, 1>::from_column_slice(&v.0);
        frame += col * col.transpose();
    }
    let eig = SymmetricEigen::new(frame).eigenvalues;
    let max = eig.max();
    if max <= 0.0 {
        return 0.0;
    }
    (eig.min().max(0.0) / max).sqrt()
}

/// Energies in `(lo, hi)` where one of the four normalization divisors
/// vanishes: `E = λ + (kπ/2)²` with `λ ∈ {1, −1, 2, 0}`.
pub fn divisor_zeros(lo: f64, hi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for lambda in [1.0, -1.0, 2.0, 0.0] {
        let mut k = 1u32;
        loop {
            let e = lambda + (k as f64 * std::f64::consts::FRAC_PI_2).powi(2);
            if e >= hi {
                break;
            }
            if e > lo {
                out.push(e);
            }
            k += 1;
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

// ---------------------------------------------------------------------------
// Certificates

/// Named determinant certificates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CertificateId {
    Det11,
    Det12,
    Det21,
    Det22,
    Det31,
    Det32,
    AndersonTracked,
}

impl CertificateId {
    pub const ALL: [CertificateId; 7] = [
        CertificateId::Det11,
        CertificateId::Det12,
        CertificateId::Det21,
        CertificateId::Det22,
        CertificateId::Det31,
        CertificateId::Det32,
        CertificateId::AndersonTracked,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CertificateId::Det11 => "det11",
            CertificateId::Det12 => "det12",
            CertificateId::Det21 => "det21",
            CertificateId::Det22 => "det22",
            CertificateId::Det31 => "det31",
            CertificateId::Det32 => "det32",
            CertificateId::AndersonTracked => "m2step6",
        }
    }

    pub fn model(self) -> ModelKind {
        match self {
            CertificateId::AndersonTracked => ModelKind::Anderson,
            _ => ModelKind::PointInteraction,
        }
    }

    /// Open energy interval on which the certificate is defined.
    pub fn domain(self) -> (f64, f64) {
        match self {
            CertificateId::Det11 | CertificateId::Det12 => (1.0, f64::INFINITY),
            CertificateId::Det21 | CertificateId::Det22 => (-1.0, 1.0),
            CertificateId::Det31 | CertificateId::Det32 => (f64::NEG_INFINITY, -1.0),
            CertificateId::AndersonTracked => (2.0, f64::INFINITY),
        }
    }

    /// The pair of point-model certificates valid at `energy`.
    pub fn point_pair(energy: f64) -> Result<(CertificateId, CertificateId)> {
        Ok(match PointRegime::of(energy)? {
            PointRegime::Oscillatory => (CertificateId::Det11, CertificateId::Det12),
            PointRegime::Mixed => (CertificateId::Det21, CertificateId::Det22),
            PointRegime::Hyperbolic => (CertificateId::Det31, CertificateId::Det32),
        })
    }

    fn check_domain(self, energy: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        if energy > lo && energy < hi {
            Ok(())
        } else {
            Err(Error::OutOfRegime {
                energy,
                regime: match self.model() {
                    ModelKind::Anderson => "E > 2 for the Anderson certificate",
                    ModelKind::PointInteraction => "regime of this point-model certificate",
                },
            })
        }
    }

    /// Certificate value at `energy` (closed form for the point model,
    /// direct determinant for the Anderson model).
    pub fn evaluate(self, energy: f64) -> Result<f64> {
        self.check_domain(energy)?;
        match self {
            CertificateId::AndersonTracked => det_certificate_model2(energy),
            CertificateId::Det11 | CertificateId::Det21 | CertificateId::Det31 => {
                Ok(det_certificates_model1(energy)?.0)
            }
            _ => Ok(det_certificates_model1(energy)?.1),
        }
    }

    /// The same determinant assembled numerically from seed entries, with its
    /// Hadamard scale.
    pub fn evaluate_direct(self, energy: f64) -> Result<(f64, f64)> {
        self.check_domain(energy)?;
        match self {
            CertificateId::AndersonTracked => {
                let m = model2_tracked_entries(energy)?;
                Ok((precise_determinant(&m), hadamard_scale(&m)))
            }
            CertificateId::Det11 | CertificateId::Det21 | CertificateId::Det31 => {
                let m = a2_minor_matrix(energy)?;
                Ok((precise_determinant(&m), hadamard_scale(&m)))
            }
            _ => {
                let m = a1b_minor_matrix(energy)?;
                Ok((precise_determinant(&m), hadamard_scale(&m)))
            }
        }
    }
}

impl fmt::Display for CertificateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CertificateId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CertificateId::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown certificate `{s}`")))
    }
}

/// One determinant-like value of a certificate, with the scale it is judged against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetValue {
    pub name: &'static str,
    pub value: f64,
    pub scale: f64,
    /// Whether a small value marks the energy as exceptional.
    pub decisive: bool,
}

impl DetValue {
    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.value.abs() / self.scale
        } else {
            self.value.abs()
        }
    }
}

/// Density certificate at one energy.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub energy: f64,
    pub model: ModelKind,
    pub seed_count: usize,
    pub lie_dim: usize,
    pub det_values: Vec<DetValue>,
    /// Normalizations skipped because their divisor vanishes.
    pub degenerate: Vec<&'static str>,
    pub is_candidate_exceptional: bool,
}

impl Certificate {
    /// First and second reported values (`det_a`, `det_b`).
    pub fn det_pair(&self) -> (f64, f64) {
        let get = |i: usize| self.det_values.get(i).map_or(f64::NAN, |d| d.value);
        (get(0), get(1))
    }
}

/// Builds the model's seeds, closes them and evaluates the determinant certificates.
pub fn certify(model: &ModelSpec, energy: f64, tol: f64) -> Result<Certificate> {
    model.check_certificate_support()?;
    match model.kind {
        ModelKind::PointInteraction => {
            let seeds = model1_seeds(energy)?;
            let lie_dim = lie_closure(&seeds, tol)?.dim();
            let (first, second) = CertificateId::point_pair(energy)?;
            let mut det_values = Vec::with_capacity(2);
            for id in [first, second] {
                let (_, scale) = id.evaluate_direct(energy)?;
                det_values.push(DetValue {
                    name: id.name(),
                    value: id.evaluate(energy)?,
                    scale,
                    decisive: true,
                });
            }
            Ok(finish(energy, model.kind, seeds.len(), lie_dim, det_values, vec![], tol))
        }
        ModelKind::Anderson => {
            let set = anderson_seed_set(energy)?;
            let lie_dim = lie_closure(&set.seeds, tol)?.dim();
            let tracked = set.tracked;
            let det_values = vec![
                DetValue {
                    name: CertificateId::AndersonTracked.name(),
                    value: precise_determinant(&tracked),
                    scale: hadamard_scale(&tracked),
                    decisive: false,
                },
                DetValue {
                    name: "rank_margin",
                    value: rank_margin(&set.seeds),
                    scale: 1.0,
                    decisive: true,
                },
            ];
            let degenerate = set.degenerate.iter().map(|d| d.0).collect();
            Ok(finish(energy, model.kind, set.seeds.len(), lie_dim, det_values, degenerate, tol))
        }
    }
}

fn finish(
    energy: f64,
    model: ModelKind,
    seed_count: usize,
    lie_dim: usize,
    det_values: Vec<DetValue>,
    degenerate: Vec<&'static str>,
    tol: f64,
) -> Certificate {
    let small = det_values.iter().any(|d| d.decisive && d.relative() < tol);
    Certificate {
        energy,
        model,
        seed_count,
        lie_dim,
        is_candidate_exceptional: lie_dim < SP2_DIM || small || !degenerate.is_empty(),
        det_values,
        degenerate,
    }
}

// ---------------------------------------------------------------------------
// Root isolation

/// Zeros of a certificate on an interval.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RootReport {
    /// Zeros found by a sign change (or an exact zero on the grid).
    pub roots: Vec<f64>,
    /// Tangential zeros: dips of `|f|` without a sign change.
    pub suspected_double: Vec<f64>,
}

impl RootReport {
    /// All zeros, sorted.
    pub fn all(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.roots.iter().chain(&self.suspected_double).copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }
}

/// Zeros of a certificate on `(lo, hi)` on a 10⁴-point scan.
pub fn exceptional_roots(which: CertificateId, interval: (f64, f64), tol: f64) -> Result<RootReport> {
    exceptional_roots_with(which, interval, tol, DEFAULT_SCAN_POINTS)
}

pub fn exceptional_roots_with(
    which: CertificateId,
    interval: (f64, f64),
    tol: f64,
    points: usize,
) -> Result<RootReport> {
    let (lo, hi) = interval;
    let (dlo, dhi) = which.domain();
    if !(lo >= dlo && hi <= dhi) || lo == dlo || hi == dhi {
        return Err(Error::InvalidInterval {
            lo,
            hi,
            reason: format!(
                "{which} is defined on ({dlo}, {dhi}); the interval must not reach a branch point"
            ),
        });
    }
    if which == CertificateId::AndersonTracked {
        let probe = scan_grid(lo, hi, points.min(200));
        let mut largest = 0.0f64;
        for e in probe {
            let (v, scale) = match which.evaluate_direct(e) {
                Err(Error::DegenerateEnergy { .. }) => continue,
                other => other?,
            };
            largest = largest.max(if scale > 0.0 { v.abs() / scale } else { 0.0 });
        }
        if largest < VANISHING_RATIO {
            return Err(Error::VanishingCertificate(which.name()));
        }
    }
    find_roots(|e| which.evaluate(e), lo, hi, tol, points)
}

fn scan_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![lo];
    }
    (0..points)
        .map(|i| {
            if i + 1 == points {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (points - 1) as f64
            }
        })
        .collect()
}

fn bisect<F: FnMut(f64) -> Result<f64>>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let fa = f(a)?;
    while b - a > tol {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Sign-change bisection on a uniform grid of `points` nodes, refined to width
/// `tol`, plus detection of tangential zeros.
///
/// A grid-local minimum of `|f|` without a sign change is refined by bisecting
/// the sign of the central difference `f(x + h) − f(x − h)`. The minimum is a
/// suspected double root when `|f|` there falls below [`DIP_RATIO`] times its
/// grid neighbours; if `f` changes sign at the minimum instead, the two
/// enclosing simple roots are bisected and reported as ordinary roots.
pub fn find_roots<F: Fn(f64) -> Result<f64>>(
    f: F,
    lo: f64,
    hi: f64,
    tol: f64,
    points: usize,
) -> Result<RootReport> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidInterval {
            lo,
            hi,
            reason: "need finite lo < hi".into(),
        });
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("root tolerance {tol} must be positive")));
    }
    let xs = scan_grid(lo, hi, points.max(3));
    let fs = xs.iter().map(|x| f(*x)).collect::<Result<Vec<_>>>()?;
    let mut report = RootReport::default();
    for i in 0..xs.len() {
        if fs[i] == 0.0 {
            let touching = i > 0
                && i + 1 < xs.len()
                && fs[i - 1] != 0.0
                && (fs[i - 1] > 0.0) == (fs[i + 1] > 0.0)
                && fs[i + 1] != 0.0;
            if touching {
                report.suspected_double.push(xs[i]);
            } else {
                report.roots.push(xs[i]);
            }
        } else if i + 1 < xs.len() && fs[i + 1] != 0.0 && (fs[i] > 0.0) != (fs[i + 1] > 0.0) {
            report.roots.push(bisect(&f, xs[i], xs[i + 1], tol)?);
        }
    }
    let spacing = (hi - lo) / (xs.len() - 1) as f64;
    for i in 1..xs.len() - 1 {
        let (a, m, b) = (fs[i - 1], fs[i], fs[i + 1]);
        let same_sign = a != 0.0 && m != 0.0 && b != 0.0 && (a > 0.0) == (m > 0.0) && (m > 0.0) == (b > 0.0);
        if !(same_sign && m.abs() <= a.abs() && m.abs() < b.abs()) {
            continue;
        }
        let slope = |x: f64| -> Result<f64> {
            let h = (spacing * 0.25).min(1e-6 * x.abs().max(1.0));
            let lo_x = (x - h).max(lo);
            let hi_x = (x + h).min(hi);
            Ok(f(hi_x)? - f(lo_x)?)
        };
        let (da, db) = (slope(xs[i - 1])?, slope(xs[i + 1])?);
        if da == 0.0 || db == 0.0 || (da > 0.0) == (db > 0.0) {
            continue;
        }
        let x_star = bisect(&slope, xs[i - 1], xs[i + 1], tol)?;
        let f_star = f(x_star)?;
        let local = a.abs().max(b.abs());
        if f_star.abs() <= DIP_RATIO * local {
            report.suspected_double.push(x_star);
        } else if (f_star > 0.0) != (m > 0.0) {
            report.roots.push(bisect(&f, xs[i - 1], x_star, tol)?);
            report.roots.push(bisect(&f, x_star, xs[i + 1], tol)?);
        }
    }
    report.roots.sort_by(f64::total_cmp);
    report.roots.dedup_by(|a, b| (*a - *b).abs() <= tol);
    report.suspected_double.sort_by(f64::total_cmp);
    Ok(report)
}

/// Dimension of the linear span of `seeds` (singular values above `tol` times the largest).
pub fn span_dimension(seeds: &[Mat4], tol: f64) -> usize {
    if seeds.is_empty() {
        return 0;
    }
    let m = DMatrix::from_fn(16, seeds.len(), |r, c| seeds[c][(r / 4, r % 4)]);
    let sv = m.singular_values();
    let top = sv.max();
    sv.iter().filter(|s| **s > tol * top).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{free_channel_cell, ParamDistribution};
    use crate::symplectic::{expm, sp2_basis, SympMat4};
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
    }

    /// `Rˡ N R⁻ˡ` by explicit matrix powers.
    /// Also returns the rounding scale `‖Rˡ‖ ‖R⁻ˡ‖ ε`.
    fn conjugation_oracle(energy: f64, l: u32, k: Matrix2<f64>) -> (Mat4, f64) {
        let r = free_channel_cell(energy, 1.0).unwrap();
        let rl = r.pow(l);
        let rl_inv = free_channel_cell(energy, -1.0).unwrap().pow(l);
        let mut n = Mat4::zeros();
        n.fixed_view_mut::<2, 2>(2, 0).copy_from(&k);
        (rl * n * rl_inv, rl.norm() * rl_inv.norm() * f64::EPSILON)
    }

    #[test]
    fn closure_trivial_cases() {
        assert_eq!(lie_closure(&[], 1e-8).unwrap().dim(), 0);
        assert_eq!(lie_closure(&sp2_basis(), 1e-8).unwrap().dim(), 10);
        let lower = unit(2, 0) + unit(3, 1);
        // a single element generates a line
        assert_eq!(lie_closure(&[lower], 1e-8).unwrap().dim(), 1);
    }

    /// Saturates the span by bracketing every pair of spanning vectors.
    fn brute_force_dim(seeds: &[Mat4]) -> usize {
        let mut span = seeds.to_vec();
        for _ in 0..4 {
            let n = span.len();
            for i in 0..n {
                for j in 0..n {
                    span.push(bracket(&span[i], &span[j]));
                }
            }
            span.retain(|m| m.norm() > 1e-12);
            span.truncate(400);
        }
        span_dimension(&span, 1e-10)
    }

    #[test]
    fn closure_matches_brute_force_saturation() {
        // [[0, I], [0, 0]] and [[0, 0], [I, 0]] span a copy of sl₂(ℝ) ⊗ I
        let lower = unit(2, 0) + unit(3, 1);
        let upper = unit(0, 2) + unit(1, 3);
        let pair = [lower, upper];
        assert_eq!(brute_force_dim(&pair), 3);
        assert_eq!(lie_closure(&pair, 1e-8).unwrap().dim(), brute_force_dim(&pair));
        let seeds = model1_seeds(5.0).unwrap();
        assert_eq!(lie_closure(&seeds, 1e-8).unwrap().dim(), brute_force_dim(&seeds));
        let few = [seeds[0], seeds[5]];
        assert_eq!(lie_closure(&few, 1e-8).unwrap().dim(), brute_force_dim(&few));
    }

    #[test]
    fn closure_rejects_non_algebra_seed() {
        let err = lie_closure(&[unit(0, 2), Mat4::identity()], 1e-8).unwrap_err();
        assert!(matches!(err, Error::InvalidSeed { index: 1, .. }), "{err}");
    }

    #[test]
    fn closure_invariances() {
        let seeds = model1_seeds(5.0).unwrap();
        let base = lie_closure(&seeds, 1e-8).unwrap().dim();
        assert_eq!(base, 10);
        let few: Vec<Mat4> = seeds[..3].to_vec();
        let d = lie_closure(&few, 1e-8).unwrap().dim();
        let mut rev = few.clone();
        rev.reverse();
        assert_eq!(lie_closure(&rev, 1e-8).unwrap().dim(), d);
        let scaled: Vec<Mat4> = few.iter().enumerate().map(|(i, m)| m * (1e3f64).powi(i as i32 - 1)).collect();
        assert_eq!(lie_closure(&scaled, 1e-8).unwrap().dim(), d);
        let g = crate::models::transfer_point(2.7, [0.3, -1.1]).unwrap();
        let gi = g.inverse();
        let conj: Vec<Mat4> = few.iter().map(|m| g.as_mat() * m * gi.as_mat()).collect();
        assert_eq!(lie_closure(&conj, 1e-8).unwrap().dim(), d);
    }

    #[test]
    fn model1_seed_examples() {
        assert_eq!(model1_a1(5.0, 0).unwrap(), unit(2, 0) + unit(3, 1));
        assert_eq!(model1_a2(5.0, 0).unwrap(), unit(2, 1) + unit(3, 0));
        assert_eq!(model1_b(), -unit(3, 1));
        for e in [5.0, 0.3, -2.5] {
            for l in 0..5 {
                let (want, eps) = conjugation_oracle(e, l, Matrix2::identity());
                let got = model1_a1(e, l).unwrap();
                assert!((want - got).amax() < 100.0 * eps, "E={e} l={l} {} {eps}", (want - got).amax());
                let (want, eps) = conjugation_oracle(e, l, Matrix2::new(0.0, 1.0, 1.0, 0.0));
                let got = model1_a2(e, l).unwrap();
                assert!((want - got).amax() < 100.0 * eps, "E={e} l={l} {} {eps}", (want - got).amax());
            }
            for s in model1_seeds(e).unwrap() {
                assert!(sp2_project(&s).1 <= 1e-12 * s.norm());
            }
        }
        assert!(matches!(model1_seeds(1.0), Err(Error::BranchPoint { .. })));
        assert!(matches!(model1_seeds(-1.0), Err(Error::BranchPoint { .. })));
    }

    #[test]
    fn a1_at_two_matches_expm_conjugation() {
        // R = exp of the channel generator with α = 2, β = √6 at E = 5.
        let mut g = Mat4::zeros();
        g[(0, 2)] = 1.0;
        g[(1, 3)] = 1.0;
        g[(2, 0)] = -4.0;
        g[(3, 1)] = -6.0;
        let r2 = expm(&(g * 2.0)).unwrap();
        let n = unit(2, 0) + unit(3, 1);
        let want = r2 * n * r2.try_inverse().unwrap();
        assert!((model1_a1(5.0, 2).unwrap() - want).amax() < 1e-12);
    }

    #[test]
    fn model1_closed_forms_match_direct_minors() {
        for e in [5.0, 3.3, 12.7, 0.4, -0.6, -1.7, -3.6] {
            let (first, second) = det_certificates_model1(e).unwrap();
            let d1 = precise_determinant(&a2_minor_matrix(e).unwrap());
            let d2 = precise_determinant(&a1b_minor_matrix(e).unwrap());
            assert!(close(first, d1, 1e-9), "E={e}: {first} vs {d1}");
            assert!(close(second, d2, 1e-9), "E={e}: {second} vs {d2}");
        }
    }

    #[test]
    fn forced_zeros() {
        let (d11, _) = det_certificates_model1(1.0 + PI * PI).unwrap();
        assert!(d11.abs() < 1e-28);
        let (_, d12) = det_certificates_model1(1.0 + PI * PI / 4.0).unwrap();
        assert!(d12.abs() < 1e-14);
    }

    #[test]
    fn model1_certificates() {
        let m = ModelSpec::new(ModelKind::PointInteraction, ParamDistribution::bernoulli_square());
        let c = certify(&m, 5.0, 1e-8).unwrap();
        assert_eq!((c.lie_dim, c.seed_count), (10, 10));
        assert!(!c.is_candidate_exceptional, "{c:?}");
        let c = certify(&m, 1.0 + PI * PI, 1e-8).unwrap();
        assert!(c.is_candidate_exceptional);
        assert!(c.det_values[0].value.abs() < 1e-20);
    }

    #[test]
    fn model2_first_seed_and_membership() {
        let seeds = model2_seeds(3.0).unwrap();
        assert_eq!(seeds.len(), 10);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = Matrix2::new(h, h, h, -h);
        let r = block_frame(&s);
        let want = r * Mat4::from_diagonal(&[1.0, 0.0, -1.0, 0.0].into()) * r.transpose();
        assert!((seeds[0] - want).amax() < 1e-15);
        for e in [2.1, 3.0, 5.5, 9.7] {
            for s in model2_seeds(e).unwrap() {
                assert!(sp2_project(&s).1 <= 1e-9 * s.norm().max(1.0));
            }
        }
        assert!(matches!(model2_seeds(2.0), Err(Error::OutOfRegime { .. })));
    }

    #[test]
    fn model2_c3_is_the_channel_derivative() {
        let e = 3.0;
        let a1 = (e - 1.0f64).sqrt();
        let r = anderson_frame([0.0, 0.0]);
        let mut inner = Mat4::zeros();
        inner[(0, 2)] = 1.0 / a1;
        inner[(2, 0)] = a1;
        let want = r * inner * r.transpose();
        let c3 = model2_seeds(e).unwrap()[2];
        assert!((c3 - want).amax() < 1e-12, "{c3}");
    }

    #[test]
    fn model2_degenerate_divisor() {
        // α₁ = π/2 makes sin α₁ cos α₁ vanish
        let e = 1.0 + (PI / 2.0).powi(2);
        assert!(divisor_zeros(2.05, 10.0).iter().any(|z| (z - e).abs() < 1e-12));
        let err = model2_seeds(e).unwrap_err();
        assert!(matches!(err, Error::DegenerateEnergy { .. }), "{err}");
        let m = ModelSpec::new(ModelKind::Anderson, ParamDistribution::bernoulli_square());
        let c = certify(&m, e, 1e-8).unwrap();
        assert!(c.is_candidate_exceptional);
        assert_eq!(c.degenerate, vec!["C3 (alpha1)"]);
    }

    #[test]
    fn model2_c7_c8_tracked_entries_by_direct_product() {
        let e = 3.0;
        let t = model2_tracked_entries(e).unwrap();
        let s5 = 5f64.sqrt();
        let alpha = (e - (1.0 + s5) / 2.0).sqrt();
        let pre = 1.0 / (4.0 * (5.0 - s5).powi(2));
        let c7 = [-(2.0 + 2.0 * s5) / alpha, (-22.0 + 10.0 * s5) / alpha, 22.0 - 10.0 * s5, -(2.0 + 2.0 * s5) / (alpha * alpha)];
        let c8 = [(2.0 + 2.0 * s5) / alpha, (22.0 - 10.0 * s5) / alpha, -2.0 - 2.0 * s5, (22.0 - 10.0 * s5) / (alpha * alpha)];
        for i in 0..4 {
            assert!(close(t[(i, 0)], pre * c7[i], 1e-12), "C7 entry {i}");
            assert!(close(t[(i, 1)], pre * c8[i], 1e-12), "C8 entry {i}");
        }
    }

    #[test]
    fn model2_tracked_determinant_vanishes_structurally() {
        for k in 0..100 {
            let e = 2.5 + k as f64 / 99.0;
            let m = model2_tracked_entries(e).unwrap();
            assert!(m.determinant().abs() <= 1e-12 * hadamard_scale(&m), "E={e}");
        }
        let err = exceptional_roots(CertificateId::AndersonTracked, (2.5, 3.5), 1e-12).unwrap_err();
        assert!(matches!(err, Error::VanishingCertificate(_)));
    }

    #[test]
    fn model2_certificate_at_three() {
        let m = ModelSpec::new(ModelKind::Anderson, ParamDistribution::bernoulli_square());
        let c = certify(&m, 3.0, 1e-8).unwrap();
        assert_eq!(c.lie_dim, 10);
        assert!(c.det_values[1].value > 1e-3);
        assert!(!c.is_candidate_exceptional, "{c:?}");
    }

    #[test]
    fn anderson_certificate_needs_its_atoms() {
        let m = ModelSpec::new(ModelKind::Anderson, ParamDistribution::point_mass([0.0, 0.0]));
        assert!(certify(&m, 3.0, 1e-8).is_err());
    }

    #[test]
    fn roots_of_det11_and_det12() {
        let r = exceptional_roots(CertificateId::Det11, (1.5, 12.0), 1e-12).unwrap();
        let all = r.all();
        for want in [PI * PI - 1.0, 1.0 + PI * PI] {
            assert!(all.iter().any(|x| (x - want).abs() < 1e-8), "{want} not in {all:?}");
            assert!(r.suspected_double.iter().any(|x| (x - want).abs() < 1e-8));
        }
        // root of cos²α − cos²β where α + β = 2π
        let g = |e: f64| (e - 1.0).sqrt() + (e + 1.0).sqrt() - 2.0 * PI;
        let e_star = bisect(|e| Ok(g(e)), 2.0, 20.0, 1e-14).unwrap();
        assert!(r.roots.iter().any(|x| (x - e_star).abs() < 1e-8), "{e_star} not in {:?}", r.roots);

        let r = exceptional_roots(CertificateId::Det12, (3.0, 4.0), 1e-12).unwrap();
        let want = 1.0 + PI * PI / 4.0;
        assert!(r.all().iter().any(|x| (x - want).abs() < 1e-8), "{r:?}");
    }

    #[test]
    fn root_interval_validation() {
        assert!(matches!(
            exceptional_roots(CertificateId::Det11, (0.5, 3.0), 1e-12),
            Err(Error::InvalidInterval { .. })
        ));
        assert!(matches!(
            exceptional_roots(CertificateId::Det21, (-1.0, 0.5), 1e-12),
            Err(Error::InvalidInterval { .. })
        ));
        assert!(exceptional_roots(CertificateId::Det21, (-0.9, 0.9), 1e-12).is_ok());
    }

    #[test]
    fn find_roots_separates_close_pair_and_double() {
        // two simple roots inside one grid cell, and a double root
        let f = |x: f64| Ok((x - 0.5001) * (x - 0.5003) * (x - 0.8).powi(2) + 0.0);
        let r = find_roots(f, 0.0, 1.0, 1e-13, 101).unwrap();
        assert_eq!(r.roots.len(), 2, "{r:?}");
        assert!((r.roots[0] - 0.5001).abs() < 1e-10 && (r.roots[1] - 0.5003).abs() < 1e-10);
        assert_eq!(r.suspected_double.len(), 1);
        assert!((r.suspected_double[0] - 0.8).abs() < 1e-9);
    }

    #[test]
    fn certificate_names_round_trip() {
        for id in CertificateId::ALL {
            assert_eq!(id.name().parse::<CertificateId>().unwrap(), id);
        }
        assert!("det13".parse::<CertificateId>().is_err());
    }

    #[test]
    fn symp_inverse_used_in_normalization_is_exact() {
        let a = anderson_cell(3.0, [1.0, 1.0], 1.0).unwrap();
        let prod = a.as_mat() * a.inverse().as_mat();
        assert!((prod - Mat4::identity()).amax() < 1e-13);
        let _ = SympMat4::identity();
    }
}
