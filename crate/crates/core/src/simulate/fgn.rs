//! Fractional Gaussian noise by circulant embedding, with a dense Cholesky
//! fallback when the embedding is not positive semidefinite.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::{HermiteError, Result};
use crate::rng;

/// Stationary unit-variance Gaussian sequence with fGn covariance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussianSequence {
    pub values: Vec<f64>,
    pub hurst_prime: f64,
    pub seed: u64,
}

/// `ρ(k) = (|k+1|^2H - 2|k|^2H + |k-1|^2H) / 2`, evaluated without
/// catastrophic cancellation at large lags.
pub fn fgn_autocovariance(hurst: f64, k: i64) -> f64 {
    let k = k.unsigned_abs() as f64;
    if k == 0.0 {
        return 1.0;
    }
    let a = 2.0 * hurst;
    let x = 1.0 / k;
    0.5 * k.powf(a) * ((a * x.ln_1p()).exp_m1() + (a * (-x).ln_1p()).exp_m1())
}

enum Factor {
    Circulant {
        sqrt_eigs: Vec<f64>,
        fft: Arc<dyn Fft<f64>>,
    },
    Cholesky(DMatrix<f64>),
}

/// Reusable generator of length-`n` fGn draws.
pub struct FgnSampler {
    n: usize,
    hurst: f64,
    factor: Factor,
}

impl std::fmt::Debug for FgnSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FgnSampler")
            .field("n", &self.n)
            .field("hurst", &self.hurst)
            .field("fallback", &self.used_fallback())
            .finish()
    }
}

impl FgnSampler {
    pub fn new(hurst: f64, n: usize) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(HermiteError::InvalidHurst(hurst));
        }
        if n < 2 {
            return Err(HermiteError::InvalidInput(format!("fGn length must be >= 2, got {n}")));
        }
        let half = n.next_power_of_two();
        let size = 2 * half;
        let mut row = vec![Complex64::new(0.0, 0.0); size];
        for k in 0..=half {
            let c = fgn_autocovariance(hurst, k as i64);
            row[k] = Complex64::new(c, 0.0);
            if k > 0 && k < half {
                row[size - k] = Complex64::new(c, 0.0);
            }
        }
        let fft = FftPlanner::new().plan_fft_forward(size);
        fft.process(&mut row);
        let max_eig = row.iter().map(|z| z.re).fold(f64::MIN, f64::max);
        let min_eig = row.iter().map(|z| z.re).fold(f64::MAX, f64::min);
        if min_eig < -1e-10 * max_eig {
            return Ok(Self {
                n,
                hurst,
                factor: Factor::Cholesky(toeplitz_cholesky(hurst, n)?),
            });
        }
        let sqrt_eigs = row.iter().map(|z| (z.re.max(0.0) / size as f64).sqrt()).collect();
        Ok(Self {
            n,
            hurst,
            factor: Factor::Circulant { sqrt_eigs, fft },
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    /// True when the circulant embedding had a negative eigenvalue and the
    /// dense Cholesky factor is used instead.
    pub fn used_fallback(&self) -> bool {
        matches!(self.factor, Factor::Cholesky(_))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match &self.factor {
            Factor::Circulant { sqrt_eigs, fft } => {
                let mut buf: Vec<Complex64> = sqrt_eigs
                    .iter()
                    .map(|&s| {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        Complex64::new(s * re, s * im)
                    })
                    .collect();
                fft.process(&mut buf);
                buf.iter().take(self.n).map(|z| z.re).collect()
            }
            Factor::Cholesky(l) => {
                let z = DVector::from_fn(self.n, |_, _| rng.sample::<f64, _>(StandardNormal));
                (l * z).iter().copied().collect()
            }
        }
    }
}

fn toeplitz_cholesky(hurst: f64, n: usize) -> Result<DMatrix<f64>> {
    let cov = DMatrix::from_fn(n, n, |i, j| fgn_autocovariance(hurst, i as i64 - j as i64));
    cov.cholesky()
        .map(|c| c.l())
        .ok_or_else(|| HermiteError::Numerical(format!("fGn covariance not positive definite (H = {hurst}, n = {n})")))
}

/// `n` draws of unit-variance fGn with Hurst index `hurst_prime`.
pub fn gen_fgn(hurst_prime: f64, n: usize, seed: u64) -> Result<GaussianSequence> {
    let sampler = FgnSampler::new(hurst_prime, n)?;
    let mut r = rng::substream(seed, rng::label::PATH, 0);
    Ok(GaussianSequence {
        values: sampler.sample(&mut r),
        hurst_prime,
        seed,
    })
}
