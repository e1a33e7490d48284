use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{HermiteError, Result};
use crate::market::{riskless_price, BasicRate, MarketSpec};
use crate::simulate::interpolate_clamped;

/// A candidate price `g(t, x)` with its partial derivatives.
pub trait PriceField {
    fn value(&self, t: f64, x: &[f64]) -> f64;
    fn dt(&self, t: f64, x: &[f64]) -> f64;
    fn dx(&self, t: f64, x: &[f64], j: usize) -> f64;
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PricePoint {
    pub t: f64,
    pub x: Vec<f64>,
}

/// `∂g/∂t + Σ_j x_j (r(t) - δ_j(t)) ∂g/∂x_j - r(t) g` with Hermite rates,
/// at each sample point.
pub fn perpetual_pde_residual(g: &dyn PriceField, market: &MarketSpec, points: &[PricePoint]) -> Result<Vec<f64>> {
    points
        .iter()
        .map(|p| {
            if p.x.len() != market.dim() {
                return Err(HermiteError::DimensionMismatch {
                    expected: market.dim(),
                    got: p.x.len(),
                });
            }
            let r = market.riskless_instantaneous(p.t);
            let transport: f64 =
                p.x.iter()
                    .enumerate()
                    .map(|(j, &xj)| xj * (r - market.dividend_instantaneous(j, p.t)) * g.dx(p.t, &p.x, j))
                    .sum();
            Ok(g.dt(p.t, &p.x) + transport - r * g.value(p.t, &p.x))
        })
        .collect()
}

pub type PayoffFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Terminal payoff as a function of the price vector.
#[derive(Clone)]
pub enum Payoff {
    /// `Π_j x_j^α_j`.
    PowerProduct {
        alpha: Vec<f64>,
    },
    /// One-dimensional payoff, linear between tabulated prices.
    Table {
        prices: Vec<f64>,
        values: Vec<f64>,
    },
    Callable(PayoffFn),
}

impl fmt::Debug for Payoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Payoff::PowerProduct { alpha } => f.debug_struct("PowerProduct").field("alpha", alpha).finish(),
            Payoff::Table { prices, .. } => f.debug_struct("Table").field("rows", &prices.len()).finish(),
            Payoff::Callable(_) => f.write_str("Callable"),
        }
    }
}

impl Payoff {
    pub fn callable<F: Fn(&[f64]) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Payoff::Callable(Arc::new(f))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Payoff::PowerProduct { alpha } => alpha.iter().zip(x).map(|(a, xi)| xi.powf(*a)).product(),
            Payoff::Table { prices, values } => interpolate_clamped(prices, values, x[0]),
            Payoff::Callable(f) => f(x),
        }
    }
}

fn check_prices(x: &[f64], d: usize) -> Result<()> {
    if x.len() != d {
        return Err(HermiteError::DimensionMismatch {
            expected: d,
            got: x.len(),
        });
    }
    if let Some(bad) = x.iter().find(|v| !(**v > 0.0)) {
        return Err(HermiteError::InvalidInput(format!(
            "prices must be positive, got {bad}"
        )));
    }
    Ok(())
}

/// Exact solution of the transport equation with terminal data at `T`:
/// `Λ(t,T) · payoff(x_j exp(Δr^cum - Δδ_j^cum))`.
pub fn price_characteristics(payoff: &Payoff, market: &MarketSpec, t: f64, horizon: f64, x: &[f64]) -> Result<f64> {
    check_prices(x, market.dim())?;
    if !(horizon >= t && t >= 0.0) {
        return Err(HermiteError::InvalidInput(format!(
            "need 0 <= t <= T, got t = {t}, T = {horizon}"
        )));
    }
    let dr = market.riskless_cumulative(horizon) - market.riskless_cumulative(t);
    let terminal: Vec<f64> = x
        .iter()
        .enumerate()
        .map(|(j, &xj)| {
            let dd = market.dividend_cumulative(j, horizon) - market.dividend_cumulative(j, t);
            xj * (dr - dd).exp()
        })
        .collect();
    Ok((-dr).exp() * payoff.eval(&terminal))
}

/// `β(t)` of an admissible power derivative `M(t)^β(t) Π_j S_j^α_j`:
/// `β(t) r^cum(t) = (1 - Σα) r^cum(t) + Σ_j α_j δ_j^cum(t)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerBeta {
    pub alpha: Vec<f64>,
    /// Set when all rates are constant, so `β` does not depend on `t`.
    pub constant: Option<f64>,
    /// The admissibility equation has a solution with `β(0+)` finite.
    pub admissible: bool,
}

impl PowerBeta {
    pub fn at(&self, market: &MarketSpec, t: f64) -> f64 {
        if let Some(b) = self.constant {
            return b;
        }
        if t <= 0.0 {
            return self.at(market, 1e-12);
        }
        let rc = market.riskless_cumulative(t);
        let sum_alpha: f64 = self.alpha.iter().sum();
        let div: f64 = self
            .alpha
            .iter()
            .enumerate()
            .map(|(j, a)| a * market.dividend_cumulative(j, t))
            .sum();
        (1.0 - sum_alpha) + div / rc
    }

    /// `d/dt [β(t) r^cum(t)]`.
    pub fn log_riskless_exponent_rate(&self, market: &MarketSpec, t: f64) -> f64 {
        let sum_alpha: f64 = self.alpha.iter().sum();
        let div: f64 = self
            .alpha
            .iter()
            .enumerate()
            .map(|(j, a)| a * market.dividend_instantaneous(j, t))
            .sum();
        (1.0 - sum_alpha) * market.riskless_instantaneous(t) + div
    }

    /// `β(t) r^cum(t)`.
    pub fn log_riskless_exponent(&self, market: &MarketSpec, t: f64) -> f64 {
        let sum_alpha: f64 = self.alpha.iter().sum();
        let div: f64 = self
            .alpha
            .iter()
            .enumerate()
            .map(|(j, a)| a * market.dividend_cumulative(j, t))
            .sum();
        (1.0 - sum_alpha) * market.riskless_cumulative(t) + div
    }
}

pub fn power_derivative_beta(alpha: &[f64], market: &MarketSpec) -> Result<PowerBeta> {
    if alpha.len() != market.dim() {
        return Err(HermiteError::DimensionMismatch {
            expected: market.dim(),
            got: alpha.len(),
        });
    }
    if market.riskless.is_zero() {
        return Err(HermiteError::Degenerate(
            "riskless basic rate is zero, so the admissibility equation has no solution".into(),
        ));
    }
    let all_constant = std::iter::once(&market.riskless)
        .chain(market.assets.iter().map(|a| &a.dividend))
        .all(|r| matches!(r, BasicRate::Constant { .. }));
    let constant = all_constant.then(|| {
        let r = market.riskless.eval(0.0);
        let sum_alpha: f64 = alpha.iter().sum();
        let div: f64 = alpha
            .iter()
            .zip(&market.assets)
            .map(|(a, s)| a * s.dividend.eval(0.0))
            .sum();
        (1.0 - sum_alpha) + div / r
    });
    let riskless_at_zero = market.riskless.eval(0.0);
    Ok(PowerBeta {
        alpha: alpha.to_vec(),
        constant,
        admissible: riskless_at_zero != 0.0,
    })
}

/// `g(t, x) = exp(β(t) r^cum(t) + offset · r^cum(t)) Π_j x_j^α_j`; the
/// admissible claim for `offset = 0`.
#[derive(Debug, Clone)]
pub struct PowerField<'a> {
    pub market: &'a MarketSpec,
    pub beta: PowerBeta,
    pub beta_offset: f64,
}

impl<'a> PowerField<'a> {
    pub fn new(market: &'a MarketSpec, alpha: &[f64], beta_offset: f64) -> Result<Self> {
        Ok(Self {
            market,
            beta: power_derivative_beta(alpha, market)?,
            beta_offset,
        })
    }

    fn exponent(&self, t: f64) -> f64 {
        self.beta.log_riskless_exponent(self.market, t) + self.beta_offset * self.market.riskless_cumulative(t)
    }
}

impl PriceField for PowerField<'_> {
    fn value(&self, t: f64, x: &[f64]) -> f64 {
        let prod: f64 = self.beta.alpha.iter().zip(x).map(|(a, xi)| xi.powf(*a)).product();
        self.exponent(t).exp() * prod
    }

    fn dt(&self, t: f64, x: &[f64]) -> f64 {
        let rate = self.beta.log_riskless_exponent_rate(self.market, t)
            + self.beta_offset * self.market.riskless_instantaneous(t);
        rate * self.value(t, x)
    }

    fn dx(&self, t: f64, x: &[f64], j: usize) -> f64 {
        self.beta.alpha[j] * self.value(t, x) / x[j]
    }
}

/// The riskless asset itself, `g = M(t)`.
pub struct RisklessField<'a>(pub &'a MarketSpec);

impl PriceField for RisklessField<'_> {
    fn value(&self, t: f64, _x: &[f64]) -> f64 {
        riskless_price(self.0, t)
    }
    fn dt(&self, t: f64, x: &[f64]) -> f64 {
        self.0.riskless_instantaneous(t) * self.value(t, x)
    }
    fn dx(&self, _t: f64, _x: &[f64], _j: usize) -> f64 {
        0.0
    }
}
