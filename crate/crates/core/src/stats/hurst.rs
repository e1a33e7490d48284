use serde::Serialize;

use super::regression::linear_fit;
use crate::error::{HermiteError, Result};
use crate::simulate::SamplePath;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HurstEstimate {
    pub h_hat: f64,
    pub std_error: f64,
    pub scales_used: Vec<usize>,
    /// Set when `h_hat` falls outside `(1/2, 1)`, where no Hermite motion exists.
    pub out_of_domain: bool,
}

const MIN_INCREMENTS: usize = 8;

/// Dyadic scales `1, 2, 4, ..` that leave at least 64 increments.
pub fn default_scales(path_len: usize) -> Vec<usize> {
    let steps = path_len.saturating_sub(1);
    (0..usize::BITS)
        .map(|k| 1usize << k)
        .take_while(|&m| steps / m >= 64)
        .collect()
}

pub fn estimate_hurst(path: &SamplePath, scales: &[usize]) -> Result<HurstEstimate> {
    let dt = path.times[1] - path.times[0];
    estimate_hurst_series(&path.values, dt, scales)
}

/// Regresses the log mean-square of non-overlapping increments on the log
/// lag; the slope is `2H`.
pub fn estimate_hurst_series(values: &[f64], dt: f64, scales: &[usize]) -> Result<HurstEstimate> {
    let steps = values.len().saturating_sub(1);
    let mut used: Vec<usize> = scales
        .iter()
        .copied()
        .filter(|&m| m > 0 && steps / m >= MIN_INCREMENTS)
        .collect();
    used.sort_unstable();
    used.dedup();
    if used.len() < 3 {
        return Err(HermiteError::InvalidInput(format!(
            "need at least 3 scales with {MIN_INCREMENTS} increments each, got {}",
            used.len()
        )));
    }
    let mut x = Vec::with_capacity(used.len());
    let mut y = Vec::with_capacity(used.len());
    for &m in &used {
        let blocks = steps / m;
        let msq = (0..blocks)
            .map(|k| (values[(k + 1) * m] - values[k * m]).powi(2))
            .sum::<f64>()
            / blocks as f64;
        if !(msq > 0.0) {
            return Err(HermiteError::Degenerate("path has zero increments".into()));
        }
        x.push((m as f64 * dt).ln());
        y.push(msq.ln());
    }
    let fit = linear_fit(&x, &y)?;
    let h_hat = 0.5 * fit.slope;
    Ok(HurstEstimate {
        h_hat,
        std_error: 0.5 * fit.slope_std_error,
        scales_used: used,
        out_of_domain: !(h_hat > 0.5 && h_hat < 1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_is_recovered() {
        // A linear trend has mean-square increments (m dt)^2: slope 2 exactly.
        let v: Vec<f64> = (0..=1024).map(|k| k as f64 * 0.01).collect();
        let e = estimate_hurst_series(&v, 0.01, &default_scales(v.len())).unwrap();
        assert!((e.h_hat - 1.0).abs() < 1e-12);
        assert!(e.out_of_domain);
    }

    #[test]
    fn constant_path_is_degenerate() {
        let v = vec![0.0; 513];
        assert!(matches!(
            estimate_hurst_series(&v, 1.0, &[1, 2, 4]),
            Err(HermiteError::Degenerate(_))
        ));
    }

    #[test]
    fn too_few_scales() {
        let v: Vec<f64> = (0..40).map(|k| k as f64).collect();
        assert!(estimate_hurst_series(&v, 1.0, &[1, 2, 8]).is_err());
    }

    #[test]
    fn default_scales_leave_enough_blocks() {
        assert_eq!(default_scales(1025), vec![1, 2, 4, 8, 16]);
        assert!(default_scales(10).is_empty());
    }
}
