use serde::Serialize;

use super::regression::linear_fit;
use crate::error::{HermiteError, Result};
use crate::kernel::HermiteSpec;
use crate::par;
use crate::rng;
use crate::simulate::{HermiteSimulator, SamplePath};

/// Sub-steps per QV block used by [`qv_samples`] for orders `κ >= 2`.
pub const QV_SUBSTEPS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QvReport {
    /// `V^(N) = Σ_{n=0}^{N} [(Δ_n)^2 - γ^(2H)]`.
    pub v_stat: f64,
    /// `N`; the statistic runs over `N + 1` blocks.
    pub n_blocks: usize,
    pub block_length: f64,
    pub normalizer: Option<f64>,
    pub normalized: Option<f64>,
}

impl QvReport {
    pub fn with_normalizer(mut self, delta: f64) -> Self {
        self.normalizer = Some(delta);
        self.normalized = Some(self.v_stat / delta);
        self
    }
}

fn block_stride(path: &SamplePath, block: f64) -> Result<usize> {
    if !(block > 0.0) {
        return Err(HermiteError::InvalidInput(format!(
            "block length must be positive, got {block}"
        )));
    }
    let dt = path.times[1] - path.times[0];
    let stride = (block / dt).round();
    if stride < 1.0 || (stride * dt - block).abs() > 1e-9 * block.max(1.0) {
        return Err(HermiteError::GridMismatch(format!(
            "block length {block} is not a multiple of the grid step {dt}"
        )));
    }
    let uniform = path
        .times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt.max(1.0));
    if !uniform {
        return Err(HermiteError::GridMismatch(
            "quadratic variation needs a uniform grid".into(),
        ));
    }
    let stride = stride as usize;
    if (path.len() - 1) / stride < 1 {
        return Err(HermiteError::GridMismatch(format!(
            "path shorter than one block of length {block}"
        )));
    }
    Ok(stride)
}

/// Centered quadratic variation over all whole blocks of length `block`
/// starting at `t = 0`, centered by `E[Δ^2] = block^(2H)`.
pub fn centered_qv(path: &SamplePath, h_for_centering: f64, block: f64) -> Result<QvReport> {
    let stride = block_stride(path, block)?;
    let blocks = (path.len() - 1) / stride;
    let center = block.powf(2.0 * h_for_centering);
    let v_stat = (0..blocks)
        .map(|k| {
            let d = path.values[(k + 1) * stride] - path.values[k * stride];
            d * d - center
        })
        .sum();
    Ok(QvReport {
        v_stat,
        n_blocks: blocks - 1,
        block_length: block,
        normalizer: None,
        normalized: None,
    })
}

/// Monte Carlo replications of `V^(N)` with block length `γ`.
///
/// Paths are simulated on `[0, N+1]` with unit blocks and rescaled by
/// `γ^H`; for `κ >= 2` each block is resolved by [`QV_SUBSTEPS`] noise
/// steps, for `κ = 1` the exact fBm increments are used.
pub fn qv_samples(spec: &HermiteSpec, n: usize, gamma: f64, mc_paths: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(HermiteError::InvalidInput("N must be positive".into()));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(HermiteError::InvalidInput(format!(
            "block length must be positive, got {gamma}"
        )));
    }
    let sub = if spec.order() == 1 { 1 } else { QV_SUBSTEPS };
    let sim = HermiteSimulator::new(*spec, sub, (n + 1) as f64)?;
    let root = rng::derive_seed(seed, rng::label::QV);
    let scale2 = gamma.powf(2.0 * spec.hurst());
    Ok(par::map_indexed(mc_paths, |i| {
        let p = sim.path(root, i as u64);
        (0..=n)
            .map(|k| {
                let d = p.values[(k + 1) * sub] - p.values[k * sub];
                (d * d - 1.0) * scale2
            })
            .sum()
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QvNormalizer {
    /// `δ^(N) = sqrt(E[(V^(N))^2])`.
    pub value: f64,
    pub std_error: f64,
    pub n_blocks: usize,
    pub block_length: f64,
    pub mc_paths: usize,
}

fn normalizer_from_samples(samples: &[f64], n: usize, gamma: f64) -> Result<QvNormalizer> {
    let m = samples.len() as f64;
    let sq: Vec<f64> = samples.iter().map(|v| v * v).collect();
    let m2 = sq.iter().sum::<f64>() / m;
    if !(m2 > 0.0) {
        return Err(HermiteError::Degenerate(
            "quadratic variation samples are all zero".into(),
        ));
    }
    let var = sq.iter().map(|s| (s - m2).powi(2)).sum::<f64>() / (m - 1.0);
    let value = m2.sqrt();
    Ok(QvNormalizer {
        value,
        std_error: (var / m).sqrt() / (2.0 * value),
        n_blocks: n,
        block_length: gamma,
        mc_paths: samples.len(),
    })
}

pub fn qv_normalizer(spec: &HermiteSpec, n: usize, gamma: f64, mc_paths: usize, seed: u64) -> Result<QvNormalizer> {
    if mc_paths < 100 {
        return Err(HermiteError::InvalidInput(format!(
            "at least 100 Monte Carlo paths required, got {mc_paths}"
        )));
    }
    let samples = qv_samples(spec, n, gamma, mc_paths, seed)?;
    normalizer_from_samples(&samples, n, gamma)
}

/// Limit exponent of `δ^(N)` in `N`.
pub fn theoretical_qv_exponent(spec: &HermiteSpec) -> f64 {
    let h = spec.hurst();
    match spec.order() {
        1 if h <= 0.75 => 0.5,
        1 => 2.0 * h - 1.0,
        k => 1.0 - 2.0 * (1.0 - h) / k as f64,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QvScalingFit {
    pub slope: f64,
    pub std_error: f64,
    pub intercept: f64,
    pub theoretical: f64,
    pub points: Vec<QvNormalizer>,
}

/// Least-squares slope of `log δ^(N)` on `log N`.
pub fn qv_scaling_exponent(
    spec: &HermiteSpec,
    n_list: &[usize],
    gamma: f64,
    mc_paths: usize,
    seed: u64,
) -> Result<QvScalingFit> {
    let mut ns: Vec<usize> = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 3 || ns[0] == 0 || ns[ns.len() - 1] < 8 * ns[0] {
        return Err(HermiteError::InvalidInput(
            "need at least 3 distinct block counts spanning a factor of 8".into(),
        ));
    }
    let points = ns
        .iter()
        .map(|&n| qv_normalizer(spec, n, gamma, mc_paths, seed))
        .collect::<Result<Vec<_>>>()?;
    let x: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.value.ln()).collect();
    let fit = linear_fit(&x, &y)?;
    Ok(QvScalingFit {
        slope: fit.slope,
        std_error: fit.slope_std_error,
        intercept: fit.intercept,
        theoretical: theoretical_qv_exponent(spec),
        points,
    })
}
