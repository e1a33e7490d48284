use serde::{Deserialize, Serialize};

use crate::error::{HermiteError, Result};
use crate::kernel::{normalizing_constant, HermiteSpec};

/// Continuous bounded rate function `t -> rate(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BasicRate {
    Constant {
        value: f64,
    },
    /// `Σ_k coefficients[k] t^k`.
    Polynomial {
        coefficients: Vec<f64>,
    },
    /// Piecewise-linear interpolation, flat beyond the end points.
    Table {
        times: Vec<f64>,
        values: Vec<f64>,
    },
}

impl BasicRate {
    pub fn constant(value: f64) -> Self {
        BasicRate::Constant { value }
    }

    pub fn zero() -> Self {
        BasicRate::Constant { value: 0.0 }
    }

    pub fn polynomial(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() || coefficients.iter().any(|c| !c.is_finite()) {
            return Err(HermiteError::InvalidInput(
                "polynomial rate needs finite coefficients".into(),
            ));
        }
        Ok(BasicRate::Polynomial { coefficients })
    }

    pub fn table(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(HermiteError::DimensionMismatch {
                expected: times.len(),
                got: values.len(),
            });
        }
        if times.len() < 2 {
            return Err(HermiteError::InvalidInput(
                "a rate table needs at least two rows".into(),
            ));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) || values.iter().any(|v| !v.is_finite()) {
            return Err(HermiteError::InvalidInput(
                "rate table times must increase strictly and values must be finite".into(),
            ));
        }
        Ok(BasicRate::Table { times, values })
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            BasicRate::Constant { value } => *value,
            BasicRate::Polynomial { coefficients } => coefficients.iter().rev().fold(0.0, |acc, c| acc * t + c),
            BasicRate::Table { times, values } => crate::simulate::interpolate_clamped(times, values, t),
        }
    }

    /// `rate'(t)`: exact for constant and polynomial rates, central
    /// difference for tables.
    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            BasicRate::Constant { .. } => 0.0,
            BasicRate::Polynomial { coefficients } => coefficients
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, c)| acc * t + k as f64 * c),
            BasicRate::Table { .. } => {
                let h = 1e-6 * t.abs().max(1.0);
                (self.eval(t + h) - self.eval(t - h)) / (2.0 * h)
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            BasicRate::Constant { value } => *value == 0.0,
            BasicRate::Polynomial { coefficients } => coefficients.iter().all(|c| *c == 0.0),
            BasicRate::Table { values, .. } => values.iter().all(|v| *v == 0.0),
        }
    }

    /// Lower and upper bounds on `[0, horizon]`, sampled on 1025 points plus
    /// all table knots.
    pub fn bounds(&self, horizon: f64) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut visit = |t: f64| {
            let v = self.eval(t);
            lo = lo.min(v);
            hi = hi.max(v);
        };
        for k in 0..=1024 {
            visit(horizon * k as f64 / 1024.0);
        }
        if let BasicRate::Table { times, .. } = self {
            times.iter().filter(|&&t| t <= horizon).for_each(|&t| visit(t));
        }
        (lo, hi)
    }

    /// Riskless rates must stay bounded away from zero.
    pub fn validate_riskless(&self, horizon: f64) -> Result<()> {
        let (lo, hi) = self.bounds(horizon);
        if !(lo > 0.0 && hi.is_finite()) {
            return Err(HermiteError::InvalidInput(format!(
                "riskless basic rate must be positive and bounded on [0, {horizon}], found range [{lo}, {hi}]"
            )));
        }
        Ok(())
    }
}

/// Converts basic rates into Hermite rates: `rate^cum(t) = D rate(t) t^(2H)`
/// and its time derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HermiteRates {
    pub hurst: f64,
    pub d_const: f64,
}

impl HermiteRates {
    pub fn new(spec: &HermiteSpec) -> Result<Self> {
        Ok(Self {
            hurst: spec.hurst(),
            d_const: normalizing_constant(spec)?.d_const,
        })
    }

    pub fn cumulative(&self, rate: &BasicRate, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        self.d_const * rate.eval(t) * t.powf(2.0 * self.hurst)
    }

    /// `d/dt [D rate(t) t^(2H)] = D (2H t^(2H-1) rate(t) + t^(2H) rate'(t))`.
    pub fn instantaneous(&self, rate: &BasicRate, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let two_h = 2.0 * self.hurst;
        self.d_const * (two_h * t.powf(two_h - 1.0) * rate.eval(t) + t.powf(two_h) * rate.derivative(t))
    }
}

pub fn cumulative_rate(spec: &HermiteSpec, rate: &BasicRate, t: f64) -> Result<f64> {
    Ok(HermiteRates::new(spec)?.cumulative(rate, t))
}

pub fn instantaneous_rate(spec: &HermiteSpec, rate: &BasicRate, t: f64) -> Result<f64> {
    Ok(HermiteRates::new(spec)?.instantaneous(rate, t))
}
