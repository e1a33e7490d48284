use nalgebra::DVector;
use serde::Serialize;

use super::MarketSpec;
use crate::error::{HermiteError, Result};
use crate::kernel::eval_kernel;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskPrice {
    pub z: Vec<f64>,
    pub evaluation_time: f64,
    /// `K_t(v)` at the solved point.
    pub kernel: f64,
    /// `‖σ z - (μ - r) K‖ / ‖(μ - r) K‖` (zero when the right side vanishes).
    pub relative_residual: f64,
}

/// Solves `Σ_m σ_jm(t) z_m(v) = (μ_j(t) - r(t)) K_t(v)` for `z(v)`.
pub fn solve_market_price_of_risk(market: &MarketSpec, t: f64, v: &[f64]) -> Result<RiskPrice> {
    let kernel = eval_kernel(&market.spec, t, v)?;
    let d = market.dim();
    let sigma = market.volatility.at(t);
    let r = market.riskless.eval(t);
    let rhs = DVector::from_fn(d, |j, _| (market.assets[j].drift.eval(t) - r) * kernel);
    let scale = sigma.amax();
    let lu = sigma.clone().lu();
    let u = lu.u();
    let min_pivot = (0..d).map(|i| u[(i, i)].abs()).fold(f64::INFINITY, f64::min);
    if !(scale > 0.0) || min_pivot <= 1e-13 * scale {
        return Err(HermiteError::SingularVolatility { t });
    }
    let z = lu.solve(&rhs).ok_or(HermiteError::SingularVolatility { t })?;
    let rhs_norm = rhs.norm();
    let relative_residual = if rhs_norm > 0.0 {
        (&sigma * &z - &rhs).norm() / rhs_norm
    } else {
        0.0
    };
    Ok(RiskPrice {
        z: z.iter().copied().collect(),
        evaluation_time: t,
        kernel,
        relative_residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskPriceDiagnostic {
    pub times: Vec<f64>,
    pub z: Vec<Vec<f64>>,
    /// Largest per-component `(max - min) / max |z|` across the time grid;
    /// zero means `z(v)` is the same at every sampled time.
    pub relative_spread: f64,
}

/// Solves the market-price-of-risk system at each time to expose how far
/// `z(v)` is from being time-independent.
pub fn risk_price_time_spread(market: &MarketSpec, times: &[f64], v: &[f64]) -> Result<RiskPriceDiagnostic> {
    let z: Vec<Vec<f64>> = times
        .iter()
        .map(|&t| solve_market_price_of_risk(market, t, v).map(|r| r.z))
        .collect::<Result<_>>()?;
    let mut spread: f64 = 0.0;
    for j in 0..market.dim() {
        let col: Vec<f64> = z.iter().map(|zt| zt[j]).collect();
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        let mag = col.iter().map(|x| x.abs()).fold(0.0, f64::max);
        if mag > 0.0 {
            spread = spread.max((hi - lo) / mag);
        }
    }
    Ok(RiskPriceDiagnostic {
        times: times.to_vec(),
        z,
        relative_spread: spread,
    })
}
