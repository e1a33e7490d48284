//! Hermite rates, riskless and risky assets, deflation and the market price
//! of risk.

mod assets;
mod rate;
mod risk;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use assets::{combine_drivers, deflate, stock_paths, stock_paths_sde, AssetPath, CombinedDriver};
pub use rate::{cumulative_rate, instantaneous_rate, BasicRate, HermiteRates};
pub use risk::{risk_price_time_spread, solve_market_price_of_risk, RiskPrice, RiskPriceDiagnostic};

use crate::error::{HermiteError, Result};
use crate::kernel::{normalizing_constant, HermiteSpec, KernelConstants};
use crate::simulate::interpolate_clamped;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Asset {
    pub drift: BasicRate,
    pub dividend: BasicRate,
    pub initial_price: f64,
}

/// Row-major `d x d` volatility, constant or tabulated in time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Volatility {
    Constant {
        matrix: Vec<Vec<f64>>,
    },
    /// Entrywise linear interpolation between tabulated matrices.
    Table {
        times: Vec<f64>,
        matrices: Vec<Vec<Vec<f64>>>,
    },
}

impl Volatility {
    pub fn dim(&self) -> usize {
        match self {
            Volatility::Constant { matrix } => matrix.len(),
            Volatility::Table { matrices, .. } => matrices.first().map_or(0, Vec::len),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Volatility::Constant { .. })
    }

    pub fn at(&self, t: f64) -> DMatrix<f64> {
        let d = self.dim();
        match self {
            Volatility::Constant { matrix } => DMatrix::from_fn(d, d, |i, j| matrix[i][j]),
            Volatility::Table { times, matrices } => DMatrix::from_fn(d, d, |i, j| {
                let col: Vec<f64> = matrices.iter().map(|m| m[i][j]).collect();
                interpolate_clamped(times, &col, t)
            }),
        }
    }

    fn validate(&self, d: usize) -> Result<()> {
        let square =
            |m: &Vec<Vec<f64>>| m.len() == d && m.iter().all(|r| r.len() == d && r.iter().all(|x| x.is_finite()));
        match self {
            Volatility::Constant { matrix } => {
                if !square(matrix) {
                    return Err(HermiteError::InvalidInput(format!(
                        "volatility must be a finite {d}x{d} matrix"
                    )));
                }
            }
            Volatility::Table { times, matrices } => {
                if times.len() != matrices.len() || times.is_empty() {
                    return Err(HermiteError::InvalidInput(
                        "volatility table needs one matrix per time".into(),
                    ));
                }
                if times.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(HermiteError::InvalidInput(
                        "volatility table times must increase strictly".into(),
                    ));
                }
                if !matrices.iter().all(square) {
                    return Err(HermiteError::InvalidInput(format!(
                        "every volatility table entry must be a finite {d}x{d} matrix"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Immutable market description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketSpec {
    pub spec: HermiteSpec,
    pub constants: KernelConstants,
    pub riskless: BasicRate,
    pub assets: Vec<Asset>,
    pub volatility: Volatility,
}

impl MarketSpec {
    pub fn new(spec: HermiteSpec, riskless: BasicRate, assets: Vec<Asset>, volatility: Volatility) -> Result<Self> {
        let constants = normalizing_constant(&spec)?;
        Self::with_constants(spec, constants, riskless, assets, volatility)
    }

    /// Skips the normalizing-constant computation (useful for `κ >= 3`,
    /// where it is a Monte Carlo estimate).
    pub fn with_constants(
        spec: HermiteSpec,
        constants: KernelConstants,
        riskless: BasicRate,
        assets: Vec<Asset>,
        volatility: Volatility,
    ) -> Result<Self> {
        if assets.is_empty() {
            return Err(HermiteError::InvalidInput(
                "a market needs at least one risky asset".into(),
            ));
        }
        if let Some(a) = assets
            .iter()
            .find(|a| !(a.initial_price > 0.0 && a.initial_price.is_finite()))
        {
            return Err(HermiteError::InvalidInput(format!(
                "initial prices must be positive, got {}",
                a.initial_price
            )));
        }
        volatility.validate(assets.len())?;
        Ok(Self {
            spec,
            constants,
            riskless,
            assets,
            volatility,
        })
    }

    /// Single-asset market with constant rates.
    pub fn single(spec: HermiteSpec, r: f64, mu: f64, dividend: f64, sigma: f64, s0: f64) -> Result<Self> {
        Self::new(
            spec,
            BasicRate::constant(r),
            vec![Asset {
                drift: BasicRate::constant(mu),
                dividend: BasicRate::constant(dividend),
                initial_price: s0,
            }],
            Volatility::Constant {
                matrix: vec![vec![sigma]],
            },
        )
    }

    pub fn dim(&self) -> usize {
        self.assets.len()
    }

    pub fn rates(&self) -> HermiteRates {
        HermiteRates {
            hurst: self.spec.hurst(),
            d_const: self.constants.d_const,
        }
    }

    pub fn riskless_cumulative(&self, t: f64) -> f64 {
        self.rates().cumulative(&self.riskless, t)
    }

    pub fn riskless_instantaneous(&self, t: f64) -> f64 {
        self.rates().instantaneous(&self.riskless, t)
    }

    pub fn dividend_cumulative(&self, j: usize, t: f64) -> f64 {
        self.rates().cumulative(&self.assets[j].dividend, t)
    }

    pub fn dividend_instantaneous(&self, j: usize, t: f64) -> f64 {
        self.rates().instantaneous(&self.assets[j].dividend, t)
    }

    pub fn drift_cumulative(&self, j: usize, t: f64) -> f64 {
        self.rates().cumulative(&self.assets[j].drift, t)
    }
}

/// `M(t) = exp(r^cum(t))`.
pub fn riskless_price(market: &MarketSpec, t: f64) -> f64 {
    market.riskless_cumulative(t).exp()
}
