//! Transfer matrices of the two coupled-string models and the finite-support
//! distributions of their random couplings.
//!
//! Both models share the coupling `V₀ = [[0, 1], [1, 0]]`. A transfer matrix
//! maps `(u₁, u₂, u₁', u₂')` across one unit cell.
//!
//! * Point interactions: `A = M(diag(ω₁, ω₂)) · A₀(E)` where `A₀(E)` is the free
//!   cell `exp([[0, I], [V₀ − E, 0]])` and `M(Q) = [[I, 0], [Q, I]]` is the
//!   derivative jump at the right end of the cell.
//! * Anderson: `A = exp([[0, I], [M_ω − E, 0]])` with `M_ω = [[ω₁, 1], [1, ω₂]]`.
//!
//! Both are evaluated in closed form by diagonalizing the 2×2 potential and
//! propagating each eigen-channel with trigonometric or hyperbolic blocks.

use nalgebra::Matrix2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symplectic::{Mat4, SympMat4};

/// Coupling strengths `(ω₁, ω₂)`.
pub type Omega = [f64; 2];

/// Generator of the parameter streams.
pub type ParamRng = ChaCha8Rng;

const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Finite-support distribution ν on ℝ².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution", into = "RawDistribution")]
pub struct ParamDistribution {
    atoms: Vec<Omega>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDistribution {
    atoms: Vec<Omega>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
}

impl TryFrom<RawDistribution> for ParamDistribution {
    type Error = Error;

    fn try_from(raw: RawDistribution) -> Result<Self> {
        match raw.weights {
            Some(w) => ParamDistribution::new(raw.atoms, w),
            None => ParamDistribution::uniform(raw.atoms),
        }
    }
}

impl From<ParamDistribution> for RawDistribution {
    fn from(d: ParamDistribution) -> Self {
        RawDistribution {
            atoms: d.atoms,
            weights: Some(d.weights),
        }
    }
}

impl ParamDistribution {
    pub fn new(atoms: Vec<Omega>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidInput("distribution needs at least one atom".into()));
        }
        if atoms.len() != weights.len() {
            return Err(Error::InvalidInput(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        if atoms.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite atom".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidInput("weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidInput(format!("weights sum to {total}, not 1")));
        }
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        // Trailing zero-weight atoms must stay unreachable.
        let last_positive = weights.iter().rposition(|w| *w > 0.0).unwrap_or(0);
        for c in cumulative.iter_mut().skip(last_positive) {
            *c = f64::INFINITY;
        }
        Ok(ParamDistribution {
            atoms,
            weights,
            cumulative,
        })
    }

    pub fn uniform(atoms: Vec<Omega>) -> Result<Self> {
        let n = atoms.len();
        let weights = vec![1.0 / n.max(1) as f64; n];
        ParamDistribution::new(atoms, weights)
    }

    pub fn point_mass(atom: Omega) -> Self {
        ParamDistribution::new(vec![atom], vec![1.0]).expect("point mass is valid")
    }

    /// Uniform on `{0, 1}²`.
    pub fn bernoulli_square() -> Self {
        ParamDistribution::uniform(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
            .expect("valid")
    }

    pub fn atoms(&self) -> &[Omega] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub(crate) fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// Whether `{x − y : x, y ∈ supp ν}` spans ℝ².
    pub fn differences_span_plane(&self) -> bool {
        let support: Vec<&Omega> = self
            .atoms
            .iter()
            .zip(&self.weights)
            .filter(|(_, w)| **w > 0.0)
            .map(|(a, _)| a)
            .collect();
        let Some(first) = support.first() else {
            return false;
        };
        let diffs: Vec<[f64; 2]> = support[1..]
            .iter()
            .map(|a| [a[0] - first[0], a[1] - first[1]])
            .collect();
        let scale = diffs
            .iter()
            .map(|d| d[0].hypot(d[1]))
            .fold(0.0, f64::max);
        diffs.iter().enumerate().any(|(i, d)| {
            diffs[i + 1..]
                .iter()
                .any(|e| (d[0] * e[1] - d[1] * e[0]).abs() > 1e-12 * scale * scale)
        })
    }

    pub fn contains_atom(&self, atom: Omega) -> bool {
        self.atoms
            .iter()
            .zip(&self.weights)
            .any(|(a, w)| *a == atom && *w > 0.0)
    }
}

/// Index of the atom selected by one uniform draw `u ∈ [0, 1)` (inverse CDF).
pub(crate) fn inverse_cdf(cumulative: &[f64], u: f64) -> usize {
    cumulative.partition_point(|c| *c <= u).min(cumulative.len() - 1)
}

/// Draws one coupling pair from `dist`.
pub fn sample_params(dist: &ParamDistribution, rng: &mut ParamRng) -> Omega {
    let u: f64 = rng.random();
    dist.atoms[inverse_cdf(&dist.cumulative, u)]
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the independent stream for `(seed, energy index, replica index)`.
pub fn stream_seed(seed: u64, energy_index: u64, replica_index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ energy_index) ^ replica_index)
}

/// ChaCha8 stream keyed by [`stream_seed`].
pub fn stream_rng(seed: u64, energy_index: u64, replica_index: u64) -> ParamRng {
    ParamRng::seed_from_u64(stream_seed(seed, energy_index, replica_index))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    /// Random point interactions at the integers.
    #[serde(rename = "point")]
    PointInteraction,
    /// Random constant potentials on unit cells.
    #[serde(rename = "anderson")]
    Anderson,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::PointInteraction => "point",
            ModelKind::Anderson => "anderson",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "point" | "1" => Ok(ModelKind::PointInteraction),
            "anderson" | "2" => Ok(ModelKind::Anderson),
            other => Err(Error::InvalidInput(format!(
                "unknown model `{other}` (expected `point` or `anderson`)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub distribution: ParamDistribution,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, distribution: ParamDistribution) -> Self {
        ModelSpec { kind, distribution }
    }

    pub fn transfer(&self, energy: f64, omega: Omega) -> Result<SympMat4> {
        match self.kind {
            ModelKind::PointInteraction => transfer_point(energy, omega),
            ModelKind::Anderson => transfer_anderson(energy, omega),
        }
    }

    /// Energies at which the closed form for some atom switches branch.
    pub fn branch_points(&self) -> Vec<f64> {
        let mut pts = match self.kind {
            ModelKind::PointInteraction => vec![-1.0, 1.0],
            ModelKind::Anderson => self
                .distribution
                .atoms()
                .iter()
                .flat_map(|w| anderson_eigen(*w).lambda)
                .collect(),
        };
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Checks the support conditions the density certificates rely on.
    pub fn check_certificate_support(&self) -> Result<()> {
        match self.kind {
            ModelKind::PointInteraction => {
                if self.distribution.differences_span_plane() {
                    Ok(())
                } else {
                    Err(Error::InvalidInput(
                        "support of the distribution is co-linear (differences do not span R^2)"
                            .into(),
                    ))
                }
            }
            ModelKind::Anderson => {
                let needed = [[0.0, 0.0], [1.0, 1.0], [1.0, 0.0]];
                match needed.iter().find(|a| !self.distribution.contains_atom(**a)) {
                    None => Ok(()),
                    Some(a) => Err(Error::InvalidInput(format!(
                        "Anderson certificate needs atom {a:?} in the support"
                    ))),
                }
            }
        }
    }
}

/// `M(q) = [[I, 0], [q, I]]` for symmetric `q`.
pub fn interface_matrix(q: &Matrix2<f64>) -> Result<SympMat4> {
    if q.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("non-finite interface matrix".into()));
    }
    if q[(0, 1)] != q[(1, 0)] {
        return Err(Error::InvalidInput(format!(
            "interface matrix must be symmetric, got off-diagonal {} and {}",
            q[(0, 1)],
            q[(1, 0)]
        )));
    }
    let mut m = Mat4::identity();
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(q);
    Ok(SympMat4::from_trusted(m))
}

/// Propagator of the scalar equation `u'' = κ u` over a cell of length `len`:
/// `[[c, s], [d, c]]` acting on `(u, u')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelPropagator {
    pub c: f64,
    pub s: f64,
    pub d: f64,
}

impl ChannelPropagator {
    /// Returns `None` at the branch point `κ = 0`.
    pub fn new(kappa: f64, len: f64) -> Option<Self> {
        if kappa < 0.0 {
            let r = (-kappa).sqrt();
            let (sin, cos) = (r * len).sin_cos();
            Some(ChannelPropagator {
                c: cos,
                s: sin / r,
                d: -r * sin,
            })
        } else if kappa > 0.0 {
            let r = kappa.sqrt();
            let (sinh, cosh) = ((r * len).sinh(), (r * len).cosh());
            Some(ChannelPropagator {
                c: cosh,
                s: sinh / r,
                d: r * sinh,
            })
        } else {
            None
        }
    }
}

/// Two decoupled channels interleaved into phase-space order `(u₁, u₂, u₁', u₂')`.
pub fn channel_cell(first: ChannelPropagator, second: ChannelPropagator) -> Mat4 {
    let mut m = Mat4::zeros();
    for (k, p) in [first, second].into_iter().enumerate() {
        m[(k, k)] = p.c;
        m[(k, k + 2)] = p.s;
        m[(k + 2, k)] = p.d;
        m[(k + 2, k + 2)] = p.c;
    }
    m
}

/// `diag(S, S)`.
pub fn block_frame(s: &Matrix2<f64>) -> Mat4 {
    let mut m = Mat4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(s);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(s);
    m
}

/// The orthogonal, symmetric matrix `U = [[1, 1], [1, −1]]/√2` diagonalizing `V₀`.
pub fn coupling_eigenbasis() -> Matrix2<f64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Matrix2::new(h, h, h, -h)
}

/// Closed-form branch of the free point-model cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointRegime {
    /// `E > 1`: both channels oscillate, `α = √(E−1)`, `β = √(E+1)`.
    Oscillatory,
    /// `−1 < E < 1`: first channel hyperbolic with `α = √(1−E)`, second oscillates with `β = √(E+1)`.
    Mixed,
    /// `E < −1`: both hyperbolic, `α = √(1−E)`, `β = √(−1−E)`.
    Hyperbolic,
}

impl PointRegime {
    pub fn of(energy: f64) -> Result<Self> {
        if !energy.is_finite() {
            return Err(Error::InvalidInput(format!("energy {energy} is not finite")));
        }
        if energy == 1.0 || energy == -1.0 {
            return Err(Error::BranchPoint {
                energy,
                what: "E = ±1 for the point-interaction model",
            });
        }
        Ok(if energy > 1.0 {
            PointRegime::Oscillatory
        } else if energy > -1.0 {
            PointRegime::Mixed
        } else {
            PointRegime::Hyperbolic
        })
    }

    /// Channel rates `(α, β)` for this regime.
    pub fn rates(self, energy: f64) -> (f64, f64) {
        match self {
            PointRegime::Oscillatory => ((energy - 1.0).sqrt(), (energy + 1.0).sqrt()),
            PointRegime::Mixed => ((1.0 - energy).sqrt(), (energy + 1.0).sqrt()),
            PointRegime::Hyperbolic => ((1.0 - energy).sqrt(), (-1.0 - energy).sqrt()),
        }
    }
}

/// Generator `[[0, I], [V₀ − E, 0]]` of the free point-model cell.
pub fn point_generator(energy: f64) -> Mat4 {
    anderson_generator(energy, [0.0, 0.0])
}

/// Generator `[[0, I], [M_ω − E, 0]]` of the first-order system for `−u'' + M_ω u = E u`.
pub fn anderson_generator(energy: f64, omega: Omega) -> Mat4 {
    let mut g = Mat4::zeros();
    g[(0, 2)] = 1.0;
    g[(1, 3)] = 1.0;
    g[(2, 0)] = omega[0] - energy;
    g[(2, 1)] = 1.0;
    g[(3, 0)] = 1.0;
    g[(3, 1)] = omega[1] - energy;
    g
}

/// Free cell in the `U`-rotated frame: the channel matrix `R_{α,β}` (or its
/// hyperbolic variants), over `len` cells.
pub fn free_channel_cell(energy: f64, len: f64) -> Result<Mat4> {
    PointRegime::of(energy)?;
    let first = ChannelPropagator::new(1.0 - energy, len);
    let second = ChannelPropagator::new(-1.0 - energy, len);
    match (first, second) {
        (Some(a), Some(b)) => Ok(channel_cell(a, b)),
        _ => Err(Error::BranchPoint {
            energy,
            what: "E = ±1 for the point-interaction model",
        }),
    }
}

/// The free cell `A₀(E) = diag(U, U) · R_{α,β} · diag(U, U)`.
pub fn free_cell(energy: f64) -> Result<SympMat4> {
    let uu = block_frame(&coupling_eigenbasis());
    Ok(SympMat4::from_trusted(uu * free_channel_cell(energy, 1.0)? * uu))
}

/// Where the derivative jump of a cell is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JumpConvention {
    /// Jump at the right end of the cell, `A = M(Q) A₀` (default).
    #[default]
    RightEndpoint,
    /// Jump at the left end, `A = A₀ M(Q)`; conjugate to the default cocycle.
    LeftEndpoint,
}

/// Point-interaction transfer matrix `M(diag(ω₁, ω₂)) · A₀(E)`.
pub fn transfer_point(energy: f64, omega: Omega) -> Result<SympMat4> {
    transfer_point_with(energy, omega, JumpConvention::RightEndpoint)
}

pub fn transfer_point_with(
    energy: f64,
    omega: Omega,
    convention: JumpConvention,
) -> Result<SympMat4> {
    let jump = interface_matrix(&Matrix2::new(omega[0], 0.0, 0.0, omega[1]))?;
    let free = free_cell(energy)?;
    Ok(match convention {
        JumpConvention::RightEndpoint => jump * free,
        JumpConvention::LeftEndpoint => free * jump,
    })
}

/// Eigen-data of the symmetric matrix `M_ω = [[ω₁, 1], [1, ω₂]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralDecomposition2 {
    /// Orthogonal eigenvector matrix; column `i` belongs to `lambda[i]`, first components positive.
    pub s: Matrix2<f64>,
    /// Eigenvalues, `lambda[0] ≥ lambda[1]`.
    pub lambda: [f64; 2],
}

pub fn anderson_eigen(omega: Omega) -> SpectralDecomposition2 {
    let [w1, w2] = omega;
    let mean = 0.5 * (w1 + w2);
    let half_gap = 0.5 * (w1 - w2);
    let radius = half_gap.hypot(1.0);
    // Eigenvectors (1, λᵢ − ω₁); the second components are written without cancellation.
    let (y1, y2) = if half_gap >= 0.0 {
        (1.0 / (radius + half_gap), -(radius + half_gap))
    } else {
        (radius - half_gap, -1.0 / (radius - half_gap))
    };
    let n1 = y1.hypot(1.0);
    let n2 = y2.hypot(1.0);
    SpectralDecomposition2 {
        s: Matrix2::new(1.0 / n1, 1.0 / n2, y1 / n1, y2 / n2),
        lambda: [mean + radius, mean - radius],
    }
}

/// Anderson-model transfer matrix over one unit cell with constant potential `M_ω`.
pub fn transfer_anderson(energy: f64, omega: Omega) -> Result<SympMat4> {
    anderson_cell(energy, omega, 1.0)
}

/// Anderson-model propagator over a length `len` with constant potential `M_ω`.
pub fn anderson_cell(energy: f64, omega: Omega, len: f64) -> Result<SympMat4> {
    if !energy.is_finite() || omega.iter().any(|w| !w.is_finite()) {
        return Err(Error::InvalidInput("non-finite energy or coupling".into()));
    }
    let eig = anderson_eigen(omega);
    let first = ChannelPropagator::new(eig.lambda[0] - energy, len);
    let second = ChannelPropagator::new(eig.lambda[1] - energy, len);
    let (Some(a), Some(b)) = (first, second) else {
        return Err(Error::BranchPoint {
            energy,
            what: "E equals an eigenvalue of M_ω",
        });
    };
    let r = block_frame(&eig.s);
    Ok(SympMat4::from_trusted(r * channel_cell(a, b) * r.transpose()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::{expm, is_symplectic, max_abs};

    fn close(a: &Mat4, b: &Mat4, tol: f64) -> bool {
        (a - b).amax() <= tol * max_abs(b).max(1.0)
    }

    #[test]
    fn interface_examples() {
        assert_eq!(*interface_matrix(&Matrix2::zeros()).unwrap().as_mat(), Mat4::identity());
        let q = Matrix2::new(1.0, 0.5, 0.5, -2.0);
        let p = Matrix2::new(0.3, -1.0, -1.0, 4.0);
        let prod = interface_matrix(&q).unwrap() * interface_matrix(&p).unwrap();
        assert_eq!(prod, interface_matrix(&(q + p)).unwrap());
        let m = interface_matrix(&Matrix2::new(3.0, 0.0, 0.0, -1.0)).unwrap();
        assert!(is_symplectic(m.as_mat(), 1e-12).unwrap());
        assert!(interface_matrix(&Matrix2::new(0.0, 1.0, 2.0, 0.0)).is_err());
    }

    #[test]
    fn point_transfer_matches_expm_in_each_regime() {
        for energy in [5.0, 0.0, -3.0, 1.5, 0.999, -1.001, 37.0] {
            let oracle = expm(&point_generator(energy)).unwrap();
            let got = transfer_point(energy, [0.0, 0.0]).unwrap();
            assert!(close(got.as_mat(), &oracle, 1e-10), "E = {energy}");
        }
    }

    #[test]
    fn point_transfer_splits_into_jump_times_free_cell() {
        let (e, w) = (2.7, [0.4, -1.3]);
        let a = transfer_point(e, w).unwrap();
        let free = transfer_point(e, [0.0, 0.0]).unwrap();
        let jump = *(a * free.inverse()).as_mat();
        let want = interface_matrix(&Matrix2::new(w[0], 0.0, 0.0, w[1])).unwrap();
        assert!(close(&jump, want.as_mat(), 1e-13));
    }

    #[test]
    fn branch_points_are_rejected() {
        assert!(matches!(transfer_point(1.0, [0.0, 0.0]), Err(Error::BranchPoint { .. })));
        assert!(matches!(transfer_point(-1.0, [1.0, 0.0]), Err(Error::BranchPoint { .. })));
        assert!(matches!(transfer_anderson(1.0, [0.0, 0.0]), Err(Error::BranchPoint { .. })));
        assert!(matches!(transfer_anderson(2.0, [1.0, 1.0]), Err(Error::BranchPoint { .. })));
    }

    #[test]
    fn eigen_data_of_the_three_certificate_atoms() {
        let d = anderson_eigen([0.0, 0.0]);
        assert_eq!(d.lambda, [1.0, -1.0]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((d.s - Matrix2::new(h, h, h, -h)).amax() < 1e-15);

        let d = anderson_eigen([1.0, 1.0]);
        assert_eq!(d.lambda, [2.0, 0.0]);
        assert!((d.s - Matrix2::new(h, h, h, -h)).amax() < 1e-15);

        let s5 = 5f64.sqrt();
        let d = anderson_eigen([1.0, 0.0]);
        assert!((d.lambda[0] - (1.0 + s5) / 2.0).abs() < 1e-15);
        assert!((d.lambda[1] - (1.0 - s5) / 2.0).abs() < 1e-15);
        let a = (10.0 - 2.0 * s5).sqrt();
        let b = (10.0 + 2.0 * s5).sqrt();
        let printed = Matrix2::new(2.0 / a, 2.0 / b, (s5 - 1.0) / a, (-1.0 - s5) / b);
        assert!((d.s - printed).amax() < 1e-15);
    }

    #[test]
    fn eigen_decomposition_reconstructs() {
        for w in [[0.3, -7.0], [-9.5, 9.5], [4.0, 4.0], [1e-9, 0.0], [10.0, -10.0]] {
            let d = anderson_eigen(w);
            assert!((d.s.transpose() * d.s - Matrix2::identity()).amax() < 1e-12);
            let rebuilt = d.s * Matrix2::new(d.lambda[0], 0.0, 0.0, d.lambda[1]) * d.s.transpose();
            assert!((rebuilt - Matrix2::new(w[0], 1.0, 1.0, w[1])).amax() < 1e-12 * 10.0);
            assert!(d.lambda[0] >= d.lambda[1]);
        }
    }

    #[test]
    fn anderson_transfer_matches_expm() {
        for (e, w) in [(3.0, [0.0, 0.0]), (2.5, [1.0, 1.0]), (0.3, [1.0, 0.0]), (-4.0, [2.0, -3.0])]
        {
            let oracle = expm(&anderson_generator(e, w)).unwrap();
            let got = transfer_anderson(e, w).unwrap();
            assert!(close(got.as_mat(), &oracle, 1e-10), "E = {e}, ω = {w:?}");
        }
    }

    #[test]
    fn anderson_transfer_at_three_with_zero_potential() {
        // channel rates √2 and 2 in the U frame
        let u = block_frame(&coupling_eigenbasis());
        let (a1, a2) = (2f64.sqrt(), 2.0_f64);
        let mut inner = Mat4::zeros();
        inner[(0, 0)] = a1.cos();
        inner[(0, 2)] = a1.sin() / a1;
        inner[(2, 0)] = -a1 * a1.sin();
        inner[(2, 2)] = a1.cos();
        inner[(1, 1)] = a2.cos();
        inner[(1, 3)] = a2.sin() / a2;
        inner[(3, 1)] = -a2 * a2.sin();
        inner[(3, 3)] = a2.cos();
        let want = u * inner * u;
        assert!(close(transfer_anderson(3.0, [0.0, 0.0]).unwrap().as_mat(), &want, 1e-14));
    }

    #[test]
    fn two_anderson_cells_are_the_square_of_one() {
        let (e, w) = (1.3, [0.5, -0.2]);
        let one = transfer_anderson(e, w).unwrap();
        let two = anderson_cell(e, w, 2.0).unwrap();
        assert!(close(two.as_mat(), (one * one).as_mat(), 1e-12));
    }

    #[test]
    fn sampling_point_masses() {
        let mut rng = stream_rng(7, 0, 0);
        let d = ParamDistribution::point_mass([0.5, -2.0]);
        assert!((0..100).all(|_| sample_params(&d, &mut rng) == [0.5, -2.0]));
        let d = ParamDistribution::new(vec![[1.0, 1.0], [2.0, 2.0]], vec![1.0, 0.0]).unwrap();
        assert!((0..1000).all(|_| sample_params(&d, &mut rng) == [1.0, 1.0]));
        let d = ParamDistribution::new(vec![[1.0, 1.0], [2.0, 2.0]], vec![0.0, 1.0]).unwrap();
        assert!((0..1000).all(|_| sample_params(&d, &mut rng) == [2.0, 2.0]));
    }

    #[test]
    fn inverse_cdf_boundaries() {
        let cum = [0.25, 0.5, 0.75, f64::INFINITY];
        assert_eq!(inverse_cdf(&cum, 0.0), 0);
        assert_eq!(inverse_cdf(&cum, 0.2499), 0);
        assert_eq!(inverse_cdf(&cum, 0.25), 1);
        assert_eq!(inverse_cdf(&cum, 0.9999999), 3);
    }

    #[test]
    fn empirical_frequencies_of_four_equal_atoms() {
        let d = ParamDistribution::bernoulli_square();
        let mut rng = stream_rng(20240601, 0, 0);
        let n = 1_000_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            let w = sample_params(&d, &mut rng);
            counts[d.atoms().iter().position(|a| *a == w).unwrap()] += 1;
        }
        let sigma = (n as f64 * 0.25 * 0.75).sqrt();
        for c in counts {
            assert!((c as f64 - 0.25 * n as f64).abs() < 4.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let draw = |s, e, r| {
            let mut rng = stream_rng(s, e, r);
            (0..4).map(|_| rng.random::<u64>()).collect::<Vec<_>>()
        };
        assert_eq!(draw(1, 2, 3), draw(1, 2, 3));
        assert_ne!(draw(1, 2, 3), draw(1, 3, 2));
        assert_ne!(draw(1, 0, 0), draw(2, 0, 0));
    }

    #[test]
    fn distribution_validation_and_json() {
        assert!(ParamDistribution::new(vec![], vec![]).is_err());
        assert!(ParamDistribution::new(vec![[0.0, 0.0]], vec![0.9]).is_err());
        assert!(ParamDistribution::new(vec![[0.0, 0.0]], vec![1.0, 0.0]).is_err());

        let d: ParamDistribution =
            serde_json::from_str(r#"{"atoms": [[0, 0], [1, 1], [1, 0]]}"#).unwrap();
        assert_eq!(d.weights(), &[1.0 / 3.0; 3]);
        let d: ParamDistribution =
            serde_json::from_str(r#"{"atoms": [[0, 0], [1, 1]], "weights": [0.25, 0.75]}"#)
                .unwrap();
        assert_eq!(d.weights(), &[0.25, 0.75]);
        assert!(serde_json::from_str::<ParamDistribution>(r#"{"atoms": []}"#).is_err());
        let back: ParamDistribution =
            serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn colinearity_check() {
        assert!(ParamDistribution::bernoulli_square().differences_span_plane());
        let line = ParamDistribution::uniform(vec![[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]).unwrap();
        assert!(!line.differences_span_plane());
        assert!(!ParamDistribution::point_mass([0.0, 0.0]).differences_span_plane());
        let spec = ModelSpec::new(ModelKind::Anderson, ParamDistribution::bernoulli_square());
        assert!(spec.check_certificate_support().is_ok());
        let spec = ModelSpec::new(ModelKind::Anderson, line);
        assert!(spec.check_certificate_support().is_err());
    }
}
