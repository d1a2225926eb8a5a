//! Energy sweeps driven by a JSON config, written as CSV.
//!
//! ```json
//! {
//!   "model": "point",
//!   "distribution": { "atoms": [[0,0],[0,1],[1,0],[1,1]] },
//!   "energy_grid": { "min": 1.5, "max": 12.0, "points": 20 },
//!   "n_steps": 100000, "n_replicas": 2, "qr_stride": 5,
//!   "seed": 7, "tol": 1e-8,
//!   "outputs": { "csv": "sweep.csv", "summary": "sweep.txt" }
//! }
//! ```
//!
//! Output is bit-identical for identical configs whatever the number of
//! workers: every (energy, replica) pair owns its random stream and rows are
//! assembled in energy order.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lyapunov::{lyapunov_qr_replicated, CocycleRun, DEFAULT_BATCHES, DEFAULT_QR_STRIDE, MAX_QR_STRIDE};
use crate::models::{ModelKind, ModelSpec, ParamDistribution};
use crate::zariski::{
    certify, divisor_zeros, exceptional_roots_with, Certificate, CertificateId, DEFAULT_CLOSURE_TOL,
    DEFAULT_SCAN_POINTS,
};

pub const SWEEP_HEADER: &str =
    "model,E,gamma1,gamma2,gamma3,gamma4,se1,se2,se3,se4,lie_dim,det_a,det_b,exceptional,n_steps,seed";
pub const CERTIFY_HEADER: &str = "model,E,lie_dim,det_a,det_b,exceptional";
/// Offset applied to grid energies that hit a branch point.
pub const BRANCH_NUDGE: f64 = 1e-9;
const DEFAULT_ROOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub csv: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub model: ModelKind,
    pub distribution: ParamDistribution,
    pub energy_grid: EnergyGrid,
    #[serde(default)]
    pub n_steps: Option<u64>,
    #[serde(default = "one")]
    pub n_replicas: usize,
    #[serde(default = "default_stride")]
    pub qr_stride: usize,
    #[serde(default = "default_batches")]
    pub n_batches: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_root_tol")]
    pub root_tol: f64,
    #[serde(default = "default_scan")]
    pub scan_points: usize,
    pub outputs: Outputs,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

fn one() -> usize {
    1
}
fn default_stride() -> usize {
    DEFAULT_QR_STRIDE
}
fn default_batches() -> usize {
    DEFAULT_BATCHES
}
fn default_tol() -> f64 {
    DEFAULT_CLOSURE_TOL
}
fn default_root_tol() -> f64 {
    DEFAULT_ROOT_TOL
}
fn default_scan() -> usize {
    DEFAULT_SCAN_POINTS
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config("<document>", e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn model_spec(&self) -> ModelSpec {
        ModelSpec::new(self.model, self.distribution.clone())
    }

    /// Checks everything the certificate-only sweep needs.
    pub fn validate(&self) -> Result<()> {
        let g = &self.energy_grid;
        if !g.min.is_finite() || !g.max.is_finite() {
            return Err(Error::config("energy_grid", "min and max must be finite"));
        }
        if g.points == 0 {
            return Err(Error::config("energy_grid.points", "must be at least 1"));
        }
        if g.points > 1 && g.min >= g.max {
            return Err(Error::config(
                "energy_grid.min",
                format!("min ({}) must be below max ({})", g.min, g.max),
            ));
        }
        if g.points == 1 && g.min > g.max {
            return Err(Error::config("energy_grid.min", "min exceeds max"));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::config("tol", "must lie in (0, 1)"));
        }
        if !(self.root_tol > 0.0) {
            return Err(Error::config("root_tol", "must be positive"));
        }
        if self.scan_points < 3 {
            return Err(Error::config("scan_points", "must be at least 3"));
        }
        if self.workers == Some(0) {
            return Err(Error::config("workers", "must be at least 1"));
        }
        self.model_spec()
            .check_certificate_support()
            .map_err(|e| Error::config("distribution", e.to_string()))
    }

    /// Additional checks for the Monte Carlo sweep.
    pub fn validate_estimation(&self) -> Result<u64> {
        self.validate()?;
        let n = self
            .n_steps
            .ok_or_else(|| Error::config("n_steps", "required for a sweep"))?;
        if n < 10_000 {
            return Err(Error::config("n_steps", "must be at least 10000"));
        }
        if self.n_replicas == 0 {
            return Err(Error::config("n_replicas", "must be at least 1"));
        }
        if !(1..=MAX_QR_STRIDE).contains(&self.qr_stride) {
            return Err(Error::config("qr_stride", format!("must lie in 1..={MAX_QR_STRIDE}")));
        }
        if self.n_batches < 2 || self.n_batches as u64 > n {
            return Err(Error::config("n_batches", "must lie in 2..=n_steps"));
        }
        Ok(n)
    }
}

/// Grid energies after branch-point nudging, with the warnings produced.
pub fn energy_grid(config: &SweepConfig) -> (Vec<f64>, Vec<String>) {
    let g = &config.energy_grid;
    let branch = config.model_spec().branch_points();
    let mut warnings = Vec::new();
    let energies = (0..g.points)
        .map(|i| {
            let e = if g.points == 1 {
                g.min
            } else if i + 1 == g.points {
                g.max
            } else {
                g.min + (g.max - g.min) * i as f64 / (g.points - 1) as f64
            };
            match branch.iter().find(|b| (e - **b).abs() < BRANCH_NUDGE * 1e-3) {
                Some(b) => {
                    let moved = b + BRANCH_NUDGE;
                    warnings.push(format!(
                        "energy {e:?} hits branch point {b:?}; moved to {moved:?}"
                    ));
                    moved
                }
                None => e,
            }
        })
        .collect();
    (energies, warnings)
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        b = b.num_threads(n);
    }
    b.build()
        .map_err(|e| Error::config("workers", e.to_string()))
}

/// Certificate at one grid energy; energies outside the certificate's regime
/// give a row with `lie_dim = 0` and a warning instead of an error.
fn certificate_or_note(model: &ModelSpec, e: f64, tol: f64) -> Result<(Option<Certificate>, Option<String>)> {
    match certify(model, e, tol) {
        Ok(c) => Ok((Some(c), None)),
        Err(Error::OutOfRegime { regime, .. }) => {
            Ok((None, Some(format!("energy {e:?} not certified: outside {regime}"))))
        }
        Err(err) => Err(err),
    }
}

fn cert_fields(c: &Option<Certificate>) -> (usize, f64, f64, bool) {
    match c {
        Some(c) => {
            let (a, b) = c.det_pair();
            (c.lie_dim, a, b, c.is_candidate_exceptional)
        }
        None => (0, f64::NAN, f64::NAN, true),
    }
}

/// One line of a sweep CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub model: ModelKind,
    pub energy: f64,
    pub gamma: [f64; 4],
    pub se: [f64; 4],
    pub lie_dim: usize,
    pub det_a: f64,
    pub det_b: f64,
    pub exceptional: bool,
    pub n_steps: u64,
    pub seed: u64,
}

impl ReportRow {
    pub fn to_csv(&self) -> String {
        let mut s = format!("{},{:?}", self.model.name(), self.energy);
        for g in self.gamma.iter().chain(&self.se) {
            let _ = write!(s, ",{g:?}");
        }
        let _ = write!(
            s,
            ",{},{:?},{:?},{},{},{}",
            self.lie_dim, self.det_a, self.det_b, self.exceptional, self.n_steps, self.seed
        );
        s
    }
}

/// Result of a sweep: CSV text and a human-readable summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<ReportRow>,
    pub warnings: Vec<String>,
    pub csv: String,
    pub summary: String,
}

/// Monte Carlo and certificate sweep; does not touch the file system.
pub fn sweep(config: &SweepConfig) -> Result<SweepReport> {
    let n_steps = config.validate_estimation()?;
    let model = config.model_spec();
    let (energies, mut warnings) = energy_grid(config);
    let results = pool(config.workers)?.install(|| {
        energies
            .par_iter()
            .enumerate()
            .map(|(i, &e)| {
                let run = CocycleRun::new(model.clone(), e, n_steps)
                    .with_stride(config.qr_stride)
                    .with_batches(config.n_batches);
                let est = lyapunov_qr_replicated(&run, config.seed, i as u64, config.n_replicas)?;
                let (cert, note) = certificate_or_note(&model, e, config.tol)?;
                Ok((est, cert, note))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut rows = Vec::with_capacity(results.len());
    for (&e, (est, cert, note)) in energies.iter().zip(results) {
        warnings.extend(note);
        let (lie_dim, det_a, det_b, exceptional) = cert_fields(&cert);
        rows.push(ReportRow {
            model: config.model,
            energy: e,
            gamma: est.gamma,
            se: est.se,
            lie_dim,
            det_a,
            det_b,
            exceptional,
            n_steps,
            seed: config.seed,
        });
    }
    let mut csv = String::from(SWEEP_HEADER);
    csv.push('\n');
    for r in &rows {
        csv.push_str(&r.to_csv());
        csv.push('\n');
    }
    for w in &warnings {
        let _ = writeln!(csv, "# warning: {w}");
    }
    let summary = sweep_summary(config, &rows, &warnings);
    Ok(SweepReport {
        rows,
        warnings,
        csv,
        summary,
    })
}

fn sweep_summary(config: &SweepConfig, rows: &[ReportRow], warnings: &[String]) -> String {
    let mut s = String::new();
    let g = &config.energy_grid;
    let _ = writeln!(
        s,
        "{} model, {} energies in [{}, {}], {} steps x {} replicas, seed {}",
        config.model.name(),
        rows.len(),
        g.min,
        g.max,
        config.n_steps.unwrap_or(0),
        config.n_replicas,
        config.seed
    );
    let separated = rows
        .iter()
        .filter(|r| r.gamma[1] > 5.0 * r.se[1] && r.gamma[0] - r.gamma[1] > 5.0 * (r.se[0] + r.se[1]))
        .count();
    let _ = writeln!(s, "gamma1 > gamma2 > 0 at 5 sigma: {separated}/{}", rows.len());
    let certified = rows.iter().filter(|r| !r.exceptional).count();
    let _ = writeln!(s, "certified (lie_dim 10, certificates nonzero): {certified}/{}", rows.len());
    for r in rows.iter().filter(|r| r.exceptional) {
        let _ = writeln!(s, "  candidate exceptional: E = {:?} (lie_dim {})", r.energy, r.lie_dim);
    }
    if let (Some(lo), Some(hi)) = (
        rows.iter().map(|r| r.gamma[1]).reduce(f64::min),
        rows.iter().map(|r| r.gamma[1]).reduce(f64::max),
    ) {
        let _ = writeln!(s, "gamma2 range: [{lo:.6}, {hi:.6}]");
    }
    for w in warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    s
}

/// Roots of the certificates over the grid interval.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RootFooter {
    pub roots: Vec<f64>,
    pub lines: Vec<String>,
}

fn certificate_roots(config: &SweepConfig) -> Result<RootFooter> {
    let g = &config.energy_grid;
    let mut footer = RootFooter::default();
    if g.points == 1 || g.min >= g.max {
        return Ok(footer);
    }
    let ids: Vec<CertificateId> = match config.model {
        ModelKind::PointInteraction => vec![
            CertificateId::Det11,
            CertificateId::Det12,
            CertificateId::Det21,
            CertificateId::Det22,
            CertificateId::Det31,
            CertificateId::Det32,
        ],
        ModelKind::Anderson => vec![CertificateId::AndersonTracked],
    };
    for id in ids {
        let (dlo, dhi) = id.domain();
        let lo = g.min.max(dlo + BRANCH_NUDGE);
        let hi = g.max.min(dhi - BRANCH_NUDGE);
        if !(lo < hi) {
            continue;
        }
        match exceptional_roots_with(id, (lo, hi), config.root_tol, config.scan_points) {
            Ok(r) => {
                footer.lines.push(format!("# {id} roots: {}", join(&r.roots)));
                footer
                    .lines
                    .push(format!("# {id} suspected double: {}", join(&r.suspected_double)));
                footer.roots.extend(r.all());
            }
            Err(Error::VanishingCertificate(name)) => {
                footer
                    .lines
                    .push(format!("# {name}: vanishes identically, no roots isolated"));
            }
            Err(e) => return Err(e),
        }
    }
    if config.model == ModelKind::Anderson {
        let lo = g.min.max(2.0);
        footer
            .lines
            .push(format!("# divisor zeros: {}", join(&divisor_zeros(lo, g.max))));
    }
    footer.roots.sort_by(f64::total_cmp);
    footer.roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9);
    Ok(footer)
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ")
}

/// Certificate-only sweep (no Monte Carlo); returns the CSV text.
pub fn certify_sweep(config: &SweepConfig) -> Result<(String, RootFooter, Vec<String>)> {
    config.validate()?;
    let model = config.model_spec();
    let (energies, mut warnings) = energy_grid(config);
    let certs = pool(config.workers)?.install(|| {
        energies
            .par_iter()
            .map(|&e| certificate_or_note(&model, e, config.tol))
            .collect::<Result<Vec<_>>>()
    })?;
    let footer = pool(config.workers)?.install(|| certificate_roots(config))?;
    let mut csv = String::from(CERTIFY_HEADER);
    csv.push('\n');
    for (&e, (cert, note)) in energies.iter().zip(certs) {
        warnings.extend(note);
        let (lie_dim, a, b, exc) = cert_fields(&cert);
        let _ = writeln!(csv, "{},{e:?},{lie_dim},{a:?},{b:?},{exc}", config.model.name());
    }
    let _ = writeln!(csv, "# roots: {}", join(&footer.roots));
    for line in &footer.lines {
        csv.push_str(line);
        csv.push('\n');
    }
    for w in &warnings {
        let _ = writeln!(csv, "# warning: {w}");
    }
    Ok((csv, footer, warnings))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Runs [`sweep`] and writes the CSV (and summary, if configured).
pub fn run_sweep(config: &SweepConfig) -> Result<SweepReport> {
    let report = sweep(config)?;
    write_file(&config.outputs.csv, &report.csv)?;
    if let Some(p) = &config.outputs.summary {
        write_file(p, &report.summary)?;
    }
    Ok(report)
}

/// Runs [`certify_sweep`] and writes the CSV.
pub fn run_certify(config: &SweepConfig) -> Result<String> {
    let (csv, _, _) = certify_sweep(config)?;
    write_file(&config.outputs.csv, &csv)?;
    Ok(csv)
}
