//! Transfer matrices, Lyapunov spectra and Zariski-density certificates for
//! two Anderson-type random operators on a pair of coupled strings.
//!
//! The two models are
//!
//! * [`ModelKind::PointInteraction`]: `-d²/dx² + V₀` with i.i.d. point
//!   interactions `ω₁ δ(x-n)`, `ω₂ δ(x-n)` on the two strings;
//! * [`ModelKind::Anderson`]: `-d²/dx² + V₀` with i.i.d. step potentials
//!   `ω₁ χ[0,1](x-n)`, `ω₂ χ[0,1](x-n)`;
//!
//! where `V₀ = [[0,1],[1,0]]` couples the strings. Both produce i.i.d.
//! 4×4 symplectic transfer matrices.
//!
//! Module map:
//!
//! * [`symplectic`]: 4×4 kernel (symplectic form, `expm`, brackets, coordinates on sp₂(ℝ))
//! * [`exterior`]: second exterior power on ℝ⁴ and Lagrangian seed vectors
//! * [`models`]: transfer-matrix builders and finite-support parameter distributions
//! * [`lyapunov`]: QR and wedge-norm estimators of the Lyapunov spectrum
//! * [`zariski`]: Lie-algebra seeds, closure, determinant certificates, exceptional energies
//! * [`sweep`]: JSON-configured energy sweeps producing deterministic CSV reports
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod error;
pub mod exterior;
pub mod lyapunov;
pub mod models;
pub mod sweep;
pub mod symplectic;
pub mod zariski;

pub use error::{Error, Result};
pub use lyapunov::{CocycleRun, LyapunovEstimate, MatrixCocycle, WedgeEstimate};
pub use models::{ModelKind, ModelSpec, ParamDistribution};
pub use symplectic::{Mat4, Sp2Coords, SympMat4};
pub use zariski::{Certificate, CertificateId, LieSubspace, RootReport};
