//! Lyapunov spectrum of i.i.d. products of 4×4 matrices.
//!
//! Two estimators are provided:
//!
//! * [`lyapunov_qr`] propagates an orthonormal 4-frame and re-orthonormalizes
//!   it every `qr_stride` steps with a positive-diagonal QR factorization;
//!   the averaged `log rᵢᵢ` give all four exponents.
//! * [`lyapunov_wedge_sum`] propagates a single Lagrangian seed (`e₁` or
//!   `e₁∧e₂`) and measures its norm growth, which converges to `γ₁ + … + γ_p`.
//!
//! Standard errors come from batch means: the run is split into `n_batches`
//! consecutive batches, and the spread of the per-batch growth rates gives
//! the error bar of their mean.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exterior::{lagrangian_seed, wedge2, LagrangianSeed, Wedge2Matrix};
use crate::models::{inverse_cdf, stream_rng, ModelSpec, ParamRng};
use crate::symplectic::Mat4;

pub const DEFAULT_QR_STRIDE: usize = 5;
pub const DEFAULT_BATCHES: usize = 50;
pub const MAX_QR_STRIDE: usize = 20;

/// A finite-support distribution of matrices, sampled by inverse CDF on one
/// uniform draw per step (the same draw [`crate::models::sample_params`] uses).
#[derive(Debug, Clone)]
pub struct MatrixCocycle {
    matrices: Vec<Mat4>,
    cumulative: Vec<f64>,
}

impl MatrixCocycle {
    /// Transfer matrices of every atom of the model's distribution at `energy`.
    pub fn from_model(model: &ModelSpec, energy: f64) -> Result<Self> {
        let matrices = model
            .distribution
            .atoms()
            .iter()
            .map(|w| model.transfer(energy, *w).map(|m| m.into_inner()))
            .collect::<Result<Vec<_>>>()?;
        Ok(MatrixCocycle {
            matrices,
            cumulative: model.distribution.cumulative().to_vec(),
        })
    }

    /// The constant cocycle `Aₙ = m`.
    pub fn deterministic(m: Mat4) -> Self {
        MatrixCocycle {
            matrices: vec![m],
            cumulative: vec![f64::INFINITY],
        }
    }

    pub fn matrices(&self) -> &[Mat4] {
        &self.matrices
    }

    fn sample_index(&self, rng: &mut ParamRng) -> usize {
        let u: f64 = rng.random();
        inverse_cdf(&self.cumulative, u)
    }

    /// `max log⁺‖A‖₂` over the support; finite support makes the moment condition automatic.
    pub fn max_log_norm(&self) -> f64 {
        self.matrices
            .iter()
            .map(|m| m.singular_values().max().ln().max(0.0))
            .fold(0.0, f64::max)
    }
}

/// One estimation run of a model at a fixed energy.
#[derive(Debug, Clone, PartialEq)]
pub struct CocycleRun {
    pub model: ModelSpec,
    pub energy: f64,
    pub n_steps: u64,
    pub qr_stride: usize,
    pub n_batches: usize,
}

impl CocycleRun {
    pub fn new(model: ModelSpec, energy: f64, n_steps: u64) -> Self {
        CocycleRun {
            model,
            energy,
            n_steps,
            qr_stride: DEFAULT_QR_STRIDE,
            n_batches: DEFAULT_BATCHES,
        }
    }

    pub fn with_stride(mut self, qr_stride: usize) -> Self {
        self.qr_stride = qr_stride;
        self
    }

    pub fn with_batches(mut self, n_batches: usize) -> Self {
        self.n_batches = n_batches;
        self
    }

    fn shape(&self) -> Result<RunShape> {
        RunShape::new(self.n_steps, self.qr_stride, self.n_batches)
    }
}

/// Step count, re-orthonormalization stride and batch count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunShape {
    n_steps: u64,
    stride: usize,
    n_batches: usize,
}

impl RunShape {
    pub fn new(n_steps: u64, stride: usize, n_batches: usize) -> Result<Self> {
        if !(1..=MAX_QR_STRIDE).contains(&stride) {
            return Err(Error::InvalidInput(format!(
                "qr_stride {stride} outside 1..={MAX_QR_STRIDE}"
            )));
        }
        if n_batches < 2 {
            return Err(Error::InvalidInput("need at least two batches".into()));
        }
        if n_steps < n_batches as u64 {
            return Err(Error::InvalidInput(format!(
                "n_steps {n_steps} smaller than n_batches {n_batches}"
            )));
        }
        Ok(RunShape {
            n_steps,
            stride,
            n_batches,
        })
    }

    fn batch_len(&self, b: usize) -> u64 {
        let nb = self.n_batches as u64;
        let b = b as u64;
        (b + 1) * self.n_steps / nb - b * self.n_steps / nb
    }
}

/// Per-batch sums of log growth factors.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchSeries<const N: usize> {
    sums: Vec<[f64; N]>,
    lengths: Vec<u64>,
}

impl<const N: usize> BatchSeries<N> {
    fn with_capacity(n: usize) -> Self {
        BatchSeries {
            sums: Vec::with_capacity(n),
            lengths: Vec::with_capacity(n),
        }
    }

    /// Concatenates replicas in the given order.
    pub fn merge(parts: impl IntoIterator<Item = Self>) -> Self {
        let mut out = BatchSeries::with_capacity(0);
        for p in parts {
            out.sums.extend(p.sums);
            out.lengths.extend(p.lengths);
        }
        out
    }

    pub fn total_steps(&self) -> u64 {
        self.lengths.iter().sum()
    }

    /// Overall growth rates and their batch-means standard errors.
    pub fn rates(&self) -> ([f64; N], [f64; N]) {
        let total = self.total_steps() as f64;
        let nb = self.sums.len() as f64;
        let mut mean = [0.0; N];
        let mut se = [0.0; N];
        for i in 0..N {
            mean[i] = self.sums.iter().map(|s| s[i]).sum::<f64>() / total;
            let batch_means = self
                .sums
                .iter()
                .zip(&self.lengths)
                .map(|(s, l)| s[i] / *l as f64);
            let avg = batch_means.clone().sum::<f64>() / nb;
            let var = batch_means.map(|m| (m - avg).powi(2)).sum::<f64>() / (nb - 1.0);
            se[i] = (var / nb).sqrt();
        }
        (mean, se)
    }
}

/// Four exponents (non-increasing) with standard errors, in nats per unit cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovEstimate {
    pub gamma: [f64; 4],
    pub se: [f64; 4],
    pub n_steps: u64,
    pub seed: u64,
}

impl LyapunovEstimate {
    fn from_series(series: &BatchSeries<4>, seed: u64) -> Self {
        let (rates, errs) = series.rates();
        let mut order = [0, 1, 2, 3];
        order.sort_by(|a, b| rates[*b].total_cmp(&rates[*a]));
        LyapunovEstimate {
            gamma: order.map(|i| rates[i]),
            se: order.map(|i| errs[i]),
            n_steps: series.total_steps(),
            seed,
        }
    }
}

/// Estimate of `γ₁ + … + γ_p` from the norm growth of a Lagrangian seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WedgeEstimate {
    pub p: usize,
    pub value: f64,
    pub se: f64,
    pub n_steps: u64,
}

/// Gram–Schmidt with one re-orthogonalization pass. Replaces `frame` by its
/// orthonormal factor and returns the (positive) diagonal of `R`.
fn orthonormalize(frame: &mut Mat4) -> Option<[f64; 4]> {
    let mut diag = [0.0; 4];
    for k in 0..4 {
        let mut v = frame.column(k).into_owned();
        for _ in 0..2 {
            for j in 0..k {
                let q = frame.column(j);
                let proj = q.dot(&v);
                v -= q * proj;
            }
        }
        let r = v.norm();
        if !(r.is_finite() && r > 0.0) {
            return None;
        }
        diag[k] = r;
        frame.set_column(k, &(v / r));
    }
    Some(diag)
}

/// QR-deflation run on an arbitrary finite-support cocycle.
pub fn qr_series(
    cocycle: &MatrixCocycle,
    shape: RunShape,
    rng: &mut ParamRng,
) -> Result<BatchSeries<4>> {
    let mut series = BatchSeries::with_capacity(shape.n_batches);
    let mut frame = Mat4::identity();
    let mut step = 0u64;
    for b in 0..shape.n_batches {
        let len = shape.batch_len(b);
        let mut sums = [0.0; 4];
        let mut pending = 0;
        for k in 0..len {
            frame = cocycle.matrices[cocycle.sample_index(rng)] * frame;
            pending += 1;
            step += 1;
            if pending == shape.stride || k + 1 == len {
                let r = orthonormalize(&mut frame).ok_or(Error::StrideTooLarge {
                    stride: shape.stride,
                    step,
                })?;
                for (s, x) in sums.iter_mut().zip(r) {
                    *s += x.ln();
                }
                pending = 0;
            }
        }
        series.sums.push(sums);
        series.lengths.push(len);
    }
    Ok(series)
}

fn renormalize(norm: f64, stride: usize, step: u64) -> Result<f64> {
    if norm.is_finite() && norm > 0.0 {
        Ok(norm.ln())
    } else {
        Err(Error::StrideTooLarge { stride, step })
    }
}

/// Wedge-norm run (`p ∈ {1, 2}`) on an arbitrary finite-support cocycle.
pub fn wedge_series(
    p: usize,
    cocycle: &MatrixCocycle,
    shape: RunShape,
    rng: &mut ParamRng,
) -> Result<BatchSeries<1>> {
    let mut series = BatchSeries::with_capacity(shape.n_batches);
    let mut step = 0u64;
    match lagrangian_seed(p)? {
        LagrangianSeed::Vector(mut v) => {
            for b in 0..shape.n_batches {
                let len = shape.batch_len(b);
                let mut sum = 0.0;
                let mut pending = 0;
                for k in 0..len {
                    v = cocycle.matrices[cocycle.sample_index(rng)] * v;
                    pending += 1;
                    step += 1;
                    if pending == shape.stride || k + 1 == len {
                        let n = v.norm();
                        sum += renormalize(n, shape.stride, step)?;
                        v /= n;
                        pending = 0;
                    }
                }
                series.sums.push([sum]);
                series.lengths.push(len);
            }
        }
        LagrangianSeed::Bivector(mut x) => {
            let lifted: Vec<Wedge2Matrix> = cocycle.matrices.iter().map(wedge2).collect();
            for b in 0..shape.n_batches {
                let len = shape.batch_len(b);
                let mut sum = 0.0;
                let mut pending = 0;
                for k in 0..len {
                    x = lifted[cocycle.sample_index(rng)] * x;
                    pending += 1;
                    step += 1;
                    if pending == shape.stride || k + 1 == len {
                        let n = x.norm();
                        sum += renormalize(n, shape.stride, step)?;
                        x /= n;
                        pending = 0;
                    }
                }
                series.sums.push([sum]);
                series.lengths.push(len);
            }
        }
    }
    Ok(series)
}

/// QR estimate of the full spectrum from the stream `(seed, 0, 0)`.
pub fn lyapunov_qr(run: &CocycleRun, seed: u64) -> Result<LyapunovEstimate> {
    lyapunov_qr_replicated(run, seed, 0, 1)
}

/// QR estimate pooled over `n_replicas` independent streams
/// `(seed, energy_index, 0..n_replicas)`. Replicas run in parallel; the
/// merge is in replica order, so the result does not depend on scheduling.
pub fn lyapunov_qr_replicated(
    run: &CocycleRun,
    seed: u64,
    energy_index: u64,
    n_replicas: usize,
) -> Result<LyapunovEstimate> {
    if n_replicas == 0 {
        return Err(Error::InvalidInput("n_replicas must be at least 1".into()));
    }
    let shape = run.shape()?;
    let cocycle = MatrixCocycle::from_model(&run.model, run.energy)?;
    let parts = (0..n_replicas as u64)
        .into_par_iter()
        .map(|r| qr_series(&cocycle, shape, &mut stream_rng(seed, energy_index, r)))
        .collect::<Result<Vec<_>>>()?;
    Ok(LyapunovEstimate::from_series(&BatchSeries::merge(parts), seed))
}

/// QR estimate for a user-supplied cocycle.
pub fn lyapunov_qr_cocycle(
    cocycle: &MatrixCocycle,
    shape: RunShape,
    seed: u64,
) -> Result<LyapunovEstimate> {
    let series = qr_series(cocycle, shape, &mut stream_rng(seed, 0, 0))?;
    Ok(LyapunovEstimate::from_series(&series, seed))
}

/// Wedge-norm estimate of `γ₁ + … + γ_p`, using the same stream as [`lyapunov_qr`].
pub fn lyapunov_wedge_sum(p: usize, run: &CocycleRun, seed: u64) -> Result<WedgeEstimate> {
    let cocycle = MatrixCocycle::from_model(&run.model, run.energy)?;
    lyapunov_wedge_cocycle(p, &cocycle, run.shape()?, seed)
}

pub fn lyapunov_wedge_cocycle(
    p: usize,
    cocycle: &MatrixCocycle,
    shape: RunShape,
    seed: u64,
) -> Result<WedgeEstimate> {
    let series = wedge_series(p, cocycle, shape, &mut stream_rng(seed, 0, 0))?;
    let ([value], [se]) = series.rates();
    Ok(WedgeEstimate {
        p,
        value,
        se,
        n_steps: series.total_steps(),
    })
}

/// `(|γ₄ + γ₁|, |γ₃ + γ₂|)`; zero for an exactly symplectic spectrum.
pub fn symmetry_residual(est: &LyapunovEstimate) -> (f64, f64) {
    let g = est.gamma;
    ((g[3] + g[0]).abs(), (g[2] + g[1]).abs())
}
