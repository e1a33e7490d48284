use std::fmt::Write as _;

use serde::Serialize;

use super::perpetual::{price_characteristics, Payoff};
use crate::error::{HermiteError, Result};
use crate::market::MarketSpec;

/// Log-price lattice `[ln x_min, ln x_max]` with `nx` cells, and `nt` time
/// steps on `[t0, horizon]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PricingGrid {
    pub t0: f64,
    pub horizon: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub nt: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdField {
    pub times: Vec<f64>,
    pub prices: Vec<f64>,
    /// `values[k][i] = g(times[k], prices[i])`.
    pub values: Vec<Vec<f64>>,
    /// Time steps actually used after stability adjustment.
    pub nt_used: usize,
}

impl FdField {
    /// Header row `t,<x_0>,<x_1>,..` then one row per time.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for x in &self.prices {
            let _ = write!(out, ",{x}");
        }
        out.push('\n');
        for (t, row) in self.times.iter().zip(&self.values) {
            let _ = write!(out, "{t}");
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

const MAX_REFINEMENTS: usize = 8;

/// First-order upwind solver for the one-asset perpetual PDE in `y = ln x`,
/// marched backward from the terminal payoff at `horizon`.
///
/// Each step uses the exact integrated coefficients `ΔC = Δ(r^cum - δ^cum)`
/// and `ΔR = Δr^cum`, so the scheme is exact for the bond. Inflow nodes take
/// the characteristic value. If the Courant number `ΔC/Δy` exceeds one the
/// time step is halved, at most eight times.
pub fn price_fd(payoff: &Payoff, market: &MarketSpec, grid: &PricingGrid) -> Result<FdField> {
    if market.dim() != 1 {
        return Err(HermiteError::InvalidInput(format!(
            "the finite-difference solver handles one asset, market has {}",
            market.dim()
        )));
    }
    if !(grid.x_min > 0.0 && grid.x_max > grid.x_min) || grid.nx < 2 || grid.nt < 1 {
        return Err(HermiteError::InvalidInput(
            "pricing grid needs 0 < x_min < x_max, nx >= 2, nt >= 1".into(),
        ));
    }
    if !(grid.horizon >= grid.t0 && grid.t0 >= 0.0) {
        return Err(HermiteError::InvalidInput(
            "pricing grid needs 0 <= t0 <= horizon".into(),
        ));
    }
    let (y0, y1) = (grid.x_min.ln(), grid.x_max.ln());
    let dy = (y1 - y0) / grid.nx as f64;
    let prices: Vec<f64> = (0..=grid.nx).map(|i| (y0 + i as f64 * dy).exp()).collect();
    let drift_cum = |t: f64| market.riskless_cumulative(t) - market.dividend_cumulative(0, t);

    let mut nt = grid.nt;
    for _ in 0..=MAX_REFINEMENTS {
        let times: Vec<f64> = (0..=nt)
            .map(|k| grid.t0 + (grid.horizon - grid.t0) * k as f64 / nt as f64)
            .collect();
        let courant = times
            .windows(2)
            .map(|w| ((drift_cum(w[1]) - drift_cum(w[0])) / dy).abs())
            .fold(0.0, f64::max);
        if courant > 1.0 {
            nt *= 2;
            continue;
        }
        let mut values = vec![Vec::new(); nt + 1];
        values[nt] = prices.iter().map(|&x| payoff.eval(&[x])).collect();
        for k in (0..nt).rev() {
            let (ta, tb) = (times[k], times[k + 1]);
            let dc = drift_cum(tb) - drift_cum(ta);
            let disc = (-(market.riskless_cumulative(tb) - market.riskless_cumulative(ta))).exp();
            let nu = (dc / dy).abs();
            let next = &values[k + 1];
            let mut row = vec![0.0; prices.len()];
            let last = prices.len() - 1;
            for i in 0..=last {
                let upstream = if dc >= 0.0 { i + 1 } else { i.wrapping_sub(1) };
                row[i] = if upstream > last {
                    price_characteristics(payoff, market, ta, grid.horizon, &[prices[i]])?
                } else {
                    disc * ((1.0 - nu) * next[i] + nu * next[upstream])
                };
            }
            values[k] = row;
        }
        return Ok(FdField {
            times,
            prices,
            values,
            nt_used: nt,
        });
    }
    Err(HermiteError::Unstable(format!(
        "Courant number still above 1 after {MAX_REFINEMENTS} time-step halvings (nt = {nt})"
    )))
}
