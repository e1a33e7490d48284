//! Quadratic variation, Hurst estimation and long-range-dependence diagnostics.

mod hurst;
mod lrd;
mod normality;
mod qv;
mod regression;

use serde::Serialize;

pub use hurst::{default_scales, estimate_hurst, estimate_hurst_series, HurstEstimate};
pub use lrd::{empirical_autocovariance, lrd_coefficient, lrd_partial_sum, LrdReport};
pub use normality::{jarque_bera, NormalityTest};
pub use qv::{
    centered_qv, qv_normalizer, qv_samples, qv_scaling_exponent, theoretical_qv_exponent, QvNormalizer, QvReport,
    QvScalingFit, QV_SUBSTEPS,
};
pub use regression::{linear_fit, LinearFit};

/// Flat JSON record for exported statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatRecord {
    pub statistic: String,
    pub value: f64,
    pub std_error: f64,
    pub config: serde_json::Value,
}
