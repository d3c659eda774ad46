//! Exact-in-distribution samplers on uniform grids for the process families
//! the supremum-tail formulas cover: fractional Brownian motion (Davies-Harte
//! circulant embedding of the increments), stationary Ornstein-Uhlenbeck (the
//! one-step AR(1) recursion), and stationary power-exponential correlation
//! (circulant embedding of the covariance sequence, padded until the
//! embedding is nonnegative definite).
//!
//! Throughout, `alpha in (0, 2]` is twice the Hurst index: fBm covariance is
//! `(t^alpha + s^alpha - |t-s|^alpha)/2`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::StreamFactory;

/// Eigenvalues this far below zero (relative to the largest) abort the
/// embedding; smaller negatives are rounding noise and clamp to zero.
const EIGENVALUE_ABORT: f64 = -1e-9;

/// Process families with exact samplers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ProcessModel {
    /// Fractional Brownian motion, `alpha` twice the Hurst index.
    FractionalBm { alpha: f64 },
    /// Stationary Ornstein-Uhlenbeck with correlation `exp(-rate |t-s|)`.
    OrnsteinUhlenbeck { rate: f64 },
    /// Stationary process with correlation `exp(-a |t-s|^alpha)`.
    StationaryPowerExp { alpha: f64, a: f64 },
}

impl ProcessModel {
    /// Local correlation exponent `alpha` in assumption terms.
    pub fn alpha(&self) -> f64 {
        match self {
            ProcessModel::FractionalBm { alpha } => *alpha,
            ProcessModel::OrnsteinUhlenbeck { .. } => 1.0,
            ProcessModel::StationaryPowerExp { alpha, .. } => *alpha,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ProcessModel::FractionalBm { alpha } | ProcessModel::StationaryPowerExp { alpha, .. }
                if !(*alpha > 0.0 && *alpha <= 2.0) =>
            {
                Err(Error::invalid("alpha", format!("must lie in (0,2], got {alpha}")))
            }
            ProcessModel::OrnsteinUhlenbeck { rate } if !(*rate > 0.0) => {
                Err(Error::invalid("rate", format!("must be positive, got {rate}")))
            }
            ProcessModel::StationaryPowerExp { a, .. } if !(*a > 0.0) => {
                Err(Error::invalid("a", format!("must be positive, got {a}")))
            }
            _ => Ok(()),
        }
    }

    /// Analytic covariance `Cov(X(s), X(t))`.
    pub fn covariance(&self, s: f64, t: f64) -> f64 {
        match self {
            ProcessModel::FractionalBm { alpha } => {
                0.5 * (t.abs().powf(*alpha) + s.abs().powf(*alpha) - (t - s).abs().powf(*alpha))
            }
            ProcessModel::OrnsteinUhlenbeck { rate } => (-rate * (t - s).abs()).exp(),
            ProcessModel::StationaryPowerExp { alpha, a } => {
                (-a * (t - s).abs().powf(*alpha)).exp()
            }
        }
    }
}

/// Sampled vector Gaussian paths on a uniform grid, `[path][component][time]`
/// row-major.
#[derive(Debug, Clone)]
pub struct PathEnsemble {
    pub model: ProcessModel,
    pub t_max: f64,
    pub n_steps: usize,
    pub n_paths: usize,
    pub n_components: usize,
    pub seed: u64,
    values: Vec<f64>,
}

impl PathEnsemble {
    /// Grid times `0 = t_0 < ... < t_N = T`.
    pub fn times(&self) -> Vec<f64> {
        let dt = self.t_max / self.n_steps as f64;
        (0..=self.n_steps).map(|k| k as f64 * dt).collect()
    }

    pub fn n_points(&self) -> usize {
        self.n_steps + 1
    }

    /// One component path of one sample.
    pub fn path(&self, path: usize, component: usize) -> &[f64] {
        let np = self.n_points();
        let base = (path * self.n_components + component) * np;
        &self.values[base..base + np]
    }

    /// Sample covariance across paths between grid indices `i` and `j` of a
    /// component, with its standard error (delta method over path products).
    pub fn empirical_covariance(&self, component: usize, i: usize, j: usize) -> Result<(f64, f64)> {
        if self.n_paths < 2 {
            return Err(Error::invalid("n_paths", "need at least 2 paths"));
        }
        let np = self.n_points();
        assert!(i < np && j < np, "grid index out of range");
        let n = self.n_paths as f64;
        let mut mean_i = 0.0;
        let mut mean_j = 0.0;
        for p in 0..self.n_paths {
            let row = self.path(p, component);
            mean_i += row[i];
            mean_j += row[j];
        }
        mean_i /= n;
        mean_j /= n;
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for p in 0..self.n_paths {
            let row = self.path(p, component);
            let prod = (row[i] - mean_i) * (row[j] - mean_j);
            sum += prod;
            sum2 += prod * prod;
        }
        let cov = sum / (n - 1.0);
        let var_prod = (sum2 / n - (sum / n) * (sum / n)).max(0.0);
        Ok((cov, (var_prod / n).sqrt()))
    }

    /// Little-endian f64 dump (`<prefix>.f64`) with a JSON sidecar
    /// (`<prefix>.json`) describing shape and provenance.
    pub fn write_binary(&self, prefix: &Path) -> Result<()> {
        let bin_path = prefix.with_extension("f64");
        let mut w = BufWriter::new(File::create(&bin_path)?);
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        let sidecar = serde_json::json!({
            "format": "f64-le",
            "layout": "path-major [n_paths][n_components][n_points]",
            "shape": [self.n_paths, self.n_components, self.n_points()],
            "t_max": self.t_max,
            "n_steps": self.n_steps,
            "seed": self.seed,
            "model": self.model,
            "data_file": bin_path.file_name().and_then(|s| s.to_str()),
        });
        let mut f = BufWriter::new(File::create(prefix.with_extension("json"))?);
        serde_json::to_writer_pretty(&mut f, &sidecar)?;
        f.flush()?;
        Ok(())
    }
}

/// A sampler that fills one path (N+1 grid values including t = 0) from a
/// caller-provided generator. Constructed once per (model, T, N); sampling is
/// then cheap and thread-safe.
pub enum PathSampler {
    Fbm(FbmSampler),
    Ou(OuSampler),
    PowerExp(PowerExpSampler),
}

impl PathSampler {
    pub fn new(model: ProcessModel, t_max: f64, n_steps: usize) -> Result<Self> {
        model.validate()?;
        if !(t_max > 0.0) {
            return Err(Error::invalid("T", "must be positive"));
        }
        match model {
            ProcessModel::FractionalBm { alpha } => {
                Ok(PathSampler::Fbm(FbmSampler::new(alpha, t_max, n_steps)?))
            }
            ProcessModel::OrnsteinUhlenbeck { rate } => {
                Ok(PathSampler::Ou(OuSampler::new(rate, t_max, n_steps)))
            }
            ProcessModel::StationaryPowerExp { alpha, a } => Ok(PathSampler::PowerExp(
                PowerExpSampler::new(alpha, a, t_max, n_steps)?,
            )),
        }
    }

    pub fn n_points(&self) -> usize {
        match self {
            PathSampler::Fbm(s) => s.n_steps + 1,
            PathSampler::Ou(s) => s.n_steps + 1,
            PathSampler::PowerExp(s) => s.n_steps + 1,
        }
    }

    /// Normal variates consumed per path; fixed, so RNG streams stay aligned.
    pub fn normals_per_path(&self) -> usize {
        match self {
            PathSampler::Fbm(s) => s.normals_per_path(),
            PathSampler::Ou(s) => s.n_steps + 1,
            PathSampler::PowerExp(s) => s.normals_per_path(),
        }
    }

    pub fn sample_into(&self, rng: &mut ChaCha12Rng, out: &mut [f64]) {
        match self {
            PathSampler::Fbm(s) => s.sample_into(rng, out),
            PathSampler::Ou(s) => s.sample_into(rng, out),
            PathSampler::PowerExp(s) => s.sample_into(rng, out),
        }
    }
}

/// Shared circulant-embedding core: given the first row of a nonnegative
/// definite circulant, prepare sqrt-eigenvalues and an FFT plan.
struct CirculantCore {
    sqrt_eig: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    m: usize,
}

impl CirculantCore {
    fn new(row: &[f64], what: &str) -> Result<Self> {
        let m = row.len();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(m);
        let mut buf: Vec<Complex<f64>> = row.iter().map(|&x| Complex::new(x, 0.0)).collect();
        fft.process(&mut buf);
        let max_eig = buf.iter().fold(0.0f64, |acc, c| acc.max(c.re));
        let abort_at = EIGENVALUE_ABORT * max_eig.max(1.0);
        let mut clamped = 0usize;
        let mut worst = 0.0f64;
        let sqrt_eig = buf
            .iter()
            .map(|c| {
                if c.re < 0.0 {
                    worst = worst.min(c.re);
                    clamped += 1;
                    0.0
                } else {
                    (c.re / m as f64).sqrt()
                }
            })
            .collect();
        if worst < abort_at {
            return Err(Error::EmbeddingFailed(format!(
                "{what}: eigenvalue {worst:.3e} below abort threshold {abort_at:.3e} \
                 (embedding size {m}); retry with larger padding"
            )));
        }
        if clamped > 0 {
            log::warn!(
                "{what}: clamped {clamped} slightly negative circulant eigenvalues \
                 (worst {worst:.3e}) to zero"
            );
        }
        Ok(Self { sqrt_eig, fft, m })
    }

    /// Draws one exact stationary Gaussian sequence of length `n_out` with the
    /// embedded covariance. Consumes exactly `m + 2` normals.
    fn sample_into(&self, rng: &mut ChaCha12Rng, out: &mut [f64]) {
        let m = self.m;
        let half = m / 2;
        let mut w: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); m];
        // Davies-Harte weights: real normals at the two self-conjugate
        // frequencies, complex pairs elsewhere.
        let g0: f64 = rng.sample(StandardNormal);
        let gh: f64 = rng.sample(StandardNormal);
        w[0] = Complex::new(self.sqrt_eig[0] * g0, 0.0);
        w[half] = Complex::new(self.sqrt_eig[half] * gh, 0.0);
        for k in 1..half {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            let s = self.sqrt_eig[k] * std::f64::consts::FRAC_1_SQRT_2;
            w[k] = Complex::new(s * a, s * b);
            let s2 = self.sqrt_eig[m - k] * std::f64::consts::FRAC_1_SQRT_2;
            w[m - k] = Complex::new(s2 * a, -s2 * b);
        }
        self.fft.process(&mut w);
        for (o, z) in out.iter_mut().zip(w.iter()) {
            *o = z.re;
        }
    }

    fn normals(&self) -> usize {
        self.m
    }
}

/// Exact fBm via circulant embedding of the fractional Gaussian noise.
pub struct FbmSampler {
    alpha: f64,
    dt: f64,
    n_steps: usize,
    core: Option<CirculantCore>, // None for the alpha = 1 (iid) and alpha = 2 (line) fast paths
}

impl FbmSampler {
    pub fn new(alpha: f64, t_max: f64, n_steps: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::invalid("alpha", format!("must lie in (0,2], got {alpha}")));
        }
        if n_steps < 2 {
            return Err(Error::invalid("N", "need at least 2 steps"));
        }
        let dt = t_max / n_steps as f64;
        let core = if alpha == 1.0 || alpha == 2.0 {
            // alpha = 1: Brownian motion, iid increments.
            // alpha = 2: B(t) = t Z, perfectly correlated increments.
            None
        } else {
            if !n_steps.is_power_of_two() {
                return Err(Error::invalid(
                    "N",
                    format!("must be a power of two for the FFT sampler, got {n_steps}"),
                ));
            }
            // fGn autocovariance on the unit-step lattice, scaled by dt^alpha.
            let scale = dt.powf(alpha);
            let gamma = |k: f64| {
                0.5 * scale
                    * ((k - 1.0).abs().powf(alpha) - 2.0 * k.abs().powf(alpha)
                        + (k + 1.0).abs().powf(alpha))
            };
            let n = n_steps;
            let mut row = Vec::with_capacity(2 * n);
            for k in 0..=n {
                row.push(gamma(k as f64));
            }
            for k in (1..n).rev() {
                row.push(gamma(k as f64));
            }
            Some(CirculantCore::new(&row, "fBm increments")?)
        };
        Ok(Self {
            alpha,
            dt,
            n_steps,
            core,
        })
    }

    fn normals_per_path(&self) -> usize {
        match &self.core {
            Some(core) => core.normals(),
            None if self.alpha == 1.0 => self.n_steps,
            None => 1,
        }
    }

    /// Fills `out` with B(0) = 0, B(dt), ..., B(T).
    pub fn sample_into(&self, rng: &mut ChaCha12Rng, out: &mut [f64]) {
        assert_eq!(out.len(), self.n_steps + 1);
        out[0] = 0.0;
        match &self.core {
            Some(core) => {
                let mut inc = vec![0.0; self.n_steps];
                core.sample_into(rng, &mut inc);
                let mut acc = 0.0;
                for (k, dv) in inc.iter().enumerate() {
                    acc += dv;
                    out[k + 1] = acc;
                }
            }
            None if self.alpha == 1.0 => {
                let sd = self.dt.sqrt();
                let mut acc = 0.0;
                for k in 0..self.n_steps {
                    let g: f64 = rng.sample(StandardNormal);
                    acc += sd * g;
                    out[k + 1] = acc;
                }
            }
            None => {
                let z: f64 = rng.sample(StandardNormal);
                for k in 1..=self.n_steps {
                    out[k] = z * (k as f64 * self.dt);
                }
            }
        }
    }
}

/// Exact stationary OU via `V_{k+1} = rho V_k + sqrt(1 - rho^2) xi_k`.
pub struct OuSampler {
    rho: f64,
    noise: f64,
    n_steps: usize,
}

impl OuSampler {
    pub fn new(rate: f64, t_max: f64, n_steps: usize) -> Self {
        let dt = t_max / n_steps as f64;
        let rho = (-rate * dt).exp();
        Self {
            rho,
            noise: (1.0 - rho * rho).sqrt(),
            n_steps,
        }
    }

    pub fn sample_into(&self, rng: &mut ChaCha12Rng, out: &mut [f64]) {
        assert_eq!(out.len(), self.n_steps + 1);
        let mut v: f64 = rng.sample(StandardNormal);
        out[0] = v;
        for o in out.iter_mut().skip(1) {
            let g: f64 = rng.sample(StandardNormal);
            v = self.rho * v + self.noise * g;
            *o = v;
        }
    }
}

/// Stationary `exp(-a |tau|^alpha)` correlation via circulant embedding of
/// the covariance sequence itself, padded with the natural extension until
/// the embedding is nonnegative definite (default 2N, doubling up to 16N).
pub struct PowerExpSampler {
    core: CirculantCore,
    n_steps: usize,
    buf_len: usize,
}

impl PowerExpSampler {
    pub fn new(alpha: f64, a: f64, t_max: f64, n_steps: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::invalid("alpha", format!("must lie in (0,2], got {alpha}")));
        }
        if !n_steps.is_power_of_two() {
            return Err(Error::invalid(
                "N",
                format!("must be a power of two for the FFT sampler, got {n_steps}"),
            ));
        }
        let dt = t_max / n_steps as f64;
        let cov = |k: usize| (-a * (k as f64 * dt).powf(alpha)).exp();
        let mut pad = 2 * n_steps;
        let mut last_err = None;
        while pad <= 16 * n_steps {
            let half = pad / 2;
            let mut row = Vec::with_capacity(pad);
            for k in 0..=half {
                row.push(cov(k));
            }
            for k in (1..half).rev() {
                row.push(cov(k));
            }
            match CirculantCore::new(&row, "power-exp covariance") {
                Ok(core) => {
                    return Ok(Self {
                        core,
                        n_steps,
                        buf_len: pad,
                    })
                }
                Err(e) => last_err = Some(e),
            }
            pad *= 2;
        }
        Err(last_err.unwrap_or_else(|| Error::EmbeddingFailed("power-exp".into())))
    }

    fn normals_per_path(&self) -> usize {
        self.core.normals()
    }

    pub fn sample_into(&self, rng: &mut ChaCha12Rng, out: &mut [f64]) {
        assert_eq!(out.len(), self.n_steps + 1);
        let mut buf = vec![0.0; self.buf_len];
        self.core.sample_into(rng, &mut buf);
        out.copy_from_slice(&buf[..self.n_steps + 1]);
    }
}

/// `n_components` independent copies of the scalar model, each path/component
/// on its own RNG stream; deterministic under `(seed, component, path chunk)`.
pub fn vector_ensemble(
    model: ProcessModel,
    n_components: usize,
    t_max: f64,
    n_steps: usize,
    n_paths: usize,
    seed: u64,
) -> Result<PathEnsemble> {
    if n_components == 0 {
        return Err(Error::invalid("n_components", "must be at least 1"));
    }
    let sampler = PathSampler::new(model, t_max, n_steps)?;
    let np = sampler.n_points();
    let factory = StreamFactory::new(seed);
    let mut values = vec![0.0; n_paths * n_components * np];

    // Parallel over paths; each (path, component) draws from the stream
    // keyed by the component and the path's chunk, advancing deterministically
    // inside the chunk.
    let chunk_paths = 256usize;
    values
        .par_chunks_mut(chunk_paths * n_components * np)
        .enumerate()
        .for_each(|(chunk_idx, slab)| {
            let paths_here = slab.len() / (n_components * np);
            for comp in 0..n_components {
                let mut rng = factory.component_chunk(comp as u32, chunk_idx as u64);
                for p in 0..paths_here {
                    let base = (p * n_components + comp) * np;
                    sampler.sample_into(&mut rng, &mut slab[base..base + np]);
                }
            }
        });

    Ok(PathEnsemble {
        model,
        t_max,
        n_steps,
        n_paths,
        n_components,
        seed,
        values,
    })
}

/// Scalar ensemble: the single-component special case.
pub fn sample_fbm(
    alpha: f64,
    t_max: f64,
    n_steps: usize,
    n_paths: usize,
    seed: u64,
) -> Result<PathEnsemble> {
    vector_ensemble(ProcessModel::FractionalBm { alpha }, 1, t_max, n_steps, n_paths, seed)
}

pub fn sample_ou(
    rate: f64,
    t_max: f64,
    n_steps: usize,
    n_paths: usize,
    seed: u64,
) -> Result<PathEnsemble> {
    vector_ensemble(ProcessModel::OrnsteinUhlenbeck { rate }, 1, t_max, n_steps, n_paths, seed)
}

pub fn sample_stationary_powerexp(
    alpha: f64,
    a: f64,
    t_max: f64,
    n_steps: usize,
    n_paths: usize,
    seed: u64,
) -> Result<PathEnsemble> {
    vector_ensemble(
        ProcessModel::StationaryPowerExp { alpha, a },
        1,
        t_max,
        n_steps,
        n_paths,
        seed,
    )
}
