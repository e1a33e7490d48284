use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::fgn::{fgn_autocovariance, FgnSampler};
use super::hermite::hermite_polynomial;
use crate::error::{HermiteError, Result};
use crate::kernel::HermiteSpec;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathMethod {
    ExactFbm,
    InvariancePrinciple,
    Subordinated,
}

/// A sampled path on a strictly increasing grid starting at `t = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplePath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub spec: HermiteSpec,
    pub method: PathMethod,
    pub seed: u64,
}

impl SamplePath {
    /// Checks the grid and the `values[0] = 0` pin.
    pub fn new(times: Vec<f64>, values: Vec<f64>, spec: HermiteSpec, method: PathMethod, seed: u64) -> Result<Self> {
        if times.len() != values.len() {
            return Err(HermiteError::DimensionMismatch {
                expected: times.len(),
                got: values.len(),
            });
        }
        if times.len() < 2 {
            return Err(HermiteError::InvalidInput(
                "a path needs at least two grid points".into(),
            ));
        }
        if times[0] != 0.0 || values[0] != 0.0 {
            return Err(HermiteError::InvalidInput("paths start at t = 0 with value 0".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(HermiteError::GridMismatch(
                "path times must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            times,
            values,
            spec,
            method,
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("non-empty path")
    }

    pub fn terminal(&self) -> f64 {
        *self.values.last().expect("non-empty path")
    }

    pub fn increments(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Linear interpolation; clamps outside the grid.
    pub fn value_at(&self, t: f64) -> f64 {
        interpolate(&self.times, &self.values, t)
    }

    /// `t,value` rows at full double precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.len() * 40);
        out.push_str("t,value\n");
        for (t, v) in self.times.iter().zip(&self.values) {
            let _ = writeln!(out, "{t},{v}");
        }
        out
    }
}

pub(crate) fn interpolate(times: &[f64], values: &[f64], t: f64) -> f64 {
    if t <= times[0] {
        return values[0];
    }
    let last = times.len() - 1;
    if t >= times[last] {
        return values[last];
    }
    let i = times.partition_point(|&x| x <= t) - 1;
    let w = (t - times[i]) / (times[i + 1] - times[i]);
    values[i] + w * (values[i + 1] - values[i])
}

/// `σ_n = sqrt(κ! Σ_{|i|<n} (n - |i|) ρ(i)^κ)`, the standard deviation of a
/// sum of `n` consecutive `He_κ(ξ_i)` with `ξ` unit fGn at `H'`.
pub fn partial_sum_scale(spec: &HermiteSpec, n: usize) -> f64 {
    let hp = spec.noise_hurst();
    let kappa = spec.order() as i32;
    let nf = n as f64;
    let cross: f64 = (1..n)
        .map(|i| (nf - i as f64) * fgn_autocovariance(hp, i as i64).powi(kappa))
        .sum();
    (spec.order_factorial() * (nf + 2.0 * cross)).sqrt()
}

fn validate_grid(n: usize, horizon: f64) -> Result<usize> {
    if n == 0 {
        return Err(HermiteError::InvalidInput(
            "steps per unit time must be positive".into(),
        ));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(HermiteError::InvalidInput(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let steps = (n as f64 * horizon - 1e-9).ceil().max(1.0) as usize;
    Ok(steps.max(2))
}

/// Invariance-principle simulator: partial sums of `He_κ(ξ)` for unit fGn
/// `ξ` at `H' = 1 + (H-1)/κ`, scaled by `σ_n` so that `Var X(1) = 1`.
///
/// The sampler and scale are built once and reused across paths.
#[derive(Debug)]
pub struct HermiteSimulator {
    spec: HermiteSpec,
    n: usize,
    steps: usize,
    sampler: FgnSampler,
    scale: f64,
    method: PathMethod,
}

impl HermiteSimulator {
    pub fn new(spec: HermiteSpec, n: usize, horizon: f64) -> Result<Self> {
        let steps = validate_grid(n, horizon)?;
        let sampler = FgnSampler::new(spec.noise_hurst(), steps)?;
        Ok(Self {
            spec,
            n,
            steps,
            sampler,
            scale: partial_sum_scale(&spec, n),
            method: PathMethod::InvariancePrinciple,
        })
    }

    /// Exact fBm: unit fGn summed and scaled by `n^(-H)`.
    pub fn exact_fbm(hurst: f64, n: usize, horizon: f64) -> Result<Self> {
        let spec = HermiteSpec::new(hurst, 1)?;
        let steps = validate_grid(n, horizon)?;
        Ok(Self {
            spec,
            n,
            steps,
            sampler: FgnSampler::new(hurst, steps)?,
            scale: (n as f64).powf(hurst),
            method: PathMethod::ExactFbm,
        })
    }

    pub fn spec(&self) -> &HermiteSpec {
        &self.spec
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn steps_per_unit(&self) -> usize {
        self.n
    }

    /// Raw Gaussian noise of path `index`.
    pub fn noise(&self, seed: u64, index: u64) -> Vec<f64> {
        let mut r = rng::substream(seed, rng::label::PATH, index);
        self.sampler.sample(&mut r)
    }

    /// Path number `index` of the Monte Carlo family rooted at `seed`.
    pub fn path(&self, seed: u64, index: u64) -> SamplePath {
        let noise = self.noise(seed, index);
        self.path_from_noise(&noise, seed)
    }

    pub fn path_from_noise(&self, noise: &[f64], seed: u64) -> SamplePath {
        let kappa = self.spec.order();
        let inv = 1.0 / self.scale;
        let mut values = Vec::with_capacity(noise.len() + 1);
        values.push(0.0);
        let mut acc = 0.0;
        for &x in noise {
            acc += if kappa == 1 { x } else { hermite_polynomial(kappa, x) };
            values.push(acc * inv);
        }
        let nf = self.n as f64;
        let times = (0..values.len()).map(|k| k as f64 / nf).collect();
        SamplePath {
            times,
            values,
            spec: self.spec,
            method: self.method,
            seed,
        }
    }
}

pub fn simulate_hermite_path(spec: &HermiteSpec, n: usize, horizon: f64, seed: u64) -> Result<SamplePath> {
    Ok(HermiteSimulator::new(*spec, n, horizon)?.path(seed, 0))
}

pub fn simulate_fbm_exact(hurst: f64, n: usize, horizon: f64, seed: u64) -> Result<SamplePath> {
    Ok(HermiteSimulator::exact_fbm(hurst, n, horizon)?.path(seed, 0))
}

const SUBORDINATE_OVERSAMPLING: usize = 4;

/// `𝔖(t) = ℋ(t^(1/(2H)))` on the uniform grid `k/n`. The underlying motion
/// is simulated on a uniform grid four times finer and read off by linear
/// interpolation at the warped times.
pub fn subordinate(spec: &HermiteSpec, n: usize, horizon: f64, seed: u64) -> Result<SamplePath> {
    subordinate_indexed(spec, n, horizon, seed, 0)
}

/// Path number `index` of the subordinated family rooted at `seed`.
pub fn subordinate_indexed(spec: &HermiteSpec, n: usize, horizon: f64, seed: u64, index: u64) -> Result<SamplePath> {
    let steps = validate_grid(n, horizon)?;
    let expo = 1.0 / (2.0 * spec.hurst());
    let t_end = steps as f64 / n as f64;
    let warped_end = t_end.powf(expo);
    let sim = HermiteSimulator::new(*spec, n * SUBORDINATE_OVERSAMPLING, warped_end)?;
    let mut r = rng::substream(seed, rng::label::SUBORDINATE, index);
    let underlying = sim.path_from_noise(&sim.sampler.sample(&mut r), seed);
    let times: Vec<f64> = (0..=steps).map(|k| k as f64 / n as f64).collect();
    let values = times
        .iter()
        .map(|&t| interpolate(&underlying.times, &underlying.values, t.powf(expo)))
        .collect();
    Ok(SamplePath {
        times,
        values,
        spec: *spec,
        method: PathMethod::Subordinated,
        seed,
    })
}
