use serde::Serialize;

use crate::error::{HermiteError, Result};
use crate::simulate::fgn_autocovariance;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LrdReport {
    /// `n^(2-2H) E[Δ(n)Δ(0)]` for `n = 1..=max_lag`.
    pub coefficients: Vec<f64>,
    /// `H(2H - 1)`.
    pub limit: f64,
}

/// Scaled autocovariance of unit increments, which depends on `H` only.
pub fn lrd_coefficient(hurst: f64, max_lag: usize) -> Result<LrdReport> {
    if max_lag == 0 {
        return Err(HermiteError::InvalidInput("max_lag must be at least 1".into()));
    }
    let coefficients = (1..=max_lag)
        .map(|n| (n as f64).powf(2.0 - 2.0 * hurst) * fgn_autocovariance(hurst, n as i64))
        .collect();
    Ok(LrdReport {
        coefficients,
        limit: hurst * (2.0 * hurst - 1.0),
    })
}

/// `Σ_{n=1}^{N} E[Δ(n)Δ(0)]`.
pub fn lrd_partial_sum(hurst: f64, n: usize) -> f64 {
    (1..=n).map(|k| fgn_autocovariance(hurst, k as i64)).sum()
}

/// Sample autocovariance `(1/(n-k)) Σ x_i x_{i+k}` of zero-mean increments,
/// for lags `0..=max_lag`.
pub fn empirical_autocovariance(increments: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if increments.len() <= max_lag {
        return Err(HermiteError::InvalidInput(format!(
            "{} increments cannot support lag {max_lag}",
            increments.len()
        )));
    }
    Ok((0..=max_lag)
        .map(|k| {
            let m = increments.len() - k;
            increments[..m]
                .iter()
                .zip(&increments[k..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / m as f64
        })
        .collect())
}
