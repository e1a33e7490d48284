use serde::{Deserialize, Serialize};

use super::path::SamplePath;
use crate::error::{HermiteError, Result};

/// Riemann-sum rule: `refinement` equal subintervals of the driver grid,
/// integrand read at relative position `evaluation_point` inside each.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StratonovichConfig {
    pub evaluation_point: f64,
    pub refinement: usize,
}

impl StratonovichConfig {
    pub fn new(evaluation_point: f64, refinement: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&evaluation_point) {
            return Err(HermiteError::InvalidInput(format!(
                "evaluation point must lie in [0, 1], got {evaluation_point}"
            )));
        }
        if refinement == 0 {
            return Err(HermiteError::InvalidInput("refinement must be positive".into()));
        }
        Ok(Self {
            evaluation_point,
            refinement,
        })
    }

    /// Left-point rule on the full driver grid.
    pub fn left(driver: &SamplePath) -> Self {
        Self {
            evaluation_point: 0.0,
            refinement: driver.len() - 1,
        }
    }

    fn stride(&self, grid_len: usize) -> Result<usize> {
        let intervals = grid_len - 1;
        if self.refinement == 0 || !intervals.is_multiple_of(self.refinement) {
            return Err(HermiteError::GridMismatch(format!(
                "refinement {} does not divide the {intervals} driver intervals",
                self.refinement
            )));
        }
        if !(0.0..=1.0).contains(&self.evaluation_point) {
            return Err(HermiteError::InvalidInput(format!(
                "evaluation point must lie in [0, 1], got {}",
                self.evaluation_point
            )));
        }
        Ok(intervals / self.refinement)
    }

    fn eval_offset(&self, stride: usize) -> usize {
        (self.evaluation_point * stride as f64).round() as usize
    }
}

/// `Σ_k f(τ_k) (X(t_{k+1}) - X(t_k))` over the coarse grid selected by
/// `cfg.refinement`, with `f` given on the full driver grid.
pub fn stratonovich_integral(integrand: &[f64], driver: &SamplePath, cfg: &StratonovichConfig) -> Result<f64> {
    if integrand.len() != driver.len() {
        return Err(HermiteError::GridMismatch(format!(
            "integrand has {} points, driver grid has {}",
            integrand.len(),
            driver.len()
        )));
    }
    let stride = cfg.stride(driver.len())?;
    let off = cfg.eval_offset(stride);
    Ok((0..cfg.refinement)
        .map(|k| {
            let a = k * stride;
            integrand[a + off] * (driver.values[a + stride] - driver.values[a])
        })
        .sum())
}

/// `G(x, t)` with its partial derivatives.
pub struct ChainRuleFn<'a> {
    pub value: &'a dyn Fn(f64, f64) -> f64,
    pub dx: &'a dyn Fn(f64, f64) -> f64,
    pub dt: &'a dyn Fn(f64, f64) -> f64,
}

/// `|G(X_T, T) - G(X_0, 0) - ∫ ∂_x G dX - ∫ ∂_t G dt|` with both integrals
/// taken as Riemann sums under `cfg`.
pub fn chain_rule_residual(g: &ChainRuleFn<'_>, driver: &SamplePath, cfg: &StratonovichConfig) -> Result<f64> {
    let stride = cfg.stride(driver.len())?;
    let off = cfg.eval_offset(stride);
    let (t, x) = (&driver.times, &driver.values);
    let fx: Vec<f64> = x.iter().zip(t).map(|(&xv, &tv)| (g.dx)(xv, tv)).collect();
    let ix = stratonovich_integral(&fx, driver, cfg)?;
    let it: f64 = (0..cfg.refinement)
        .map(|k| {
            let a = k * stride;
            (g.dt)(x[a + off], t[a + off]) * (t[a + stride] - t[a])
        })
        .sum();
    let last = driver.len() - 1;
    let total = (g.value)(x[last], t[last]) - (g.value)(x[0], t[0]);
    Ok((total - ix - it).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::simulate_fbm_exact;

    fn path() -> SamplePath {
        simulate_fbm_exact(0.8, 256, 1.0, 11).unwrap()
    }

    #[test]
    fn constant_integrand_telescopes() {
        let p = path();
        let ones = vec![1.0; p.len()];
        for r in [1, 4, 256] {
            for d in [0.0, 0.5, 1.0] {
                let cfg = StratonovichConfig::new(d, r).unwrap();
                let i = stratonovich_integral(&ones, &p, &cfg).unwrap();
                assert!((i - p.terminal()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn identity_chain_rule_is_exact() {
        let p = path();
        let g = ChainRuleFn {
            value: &|x, _| x,
            dx: &|_, _| 1.0,
            dt: &|_, _| 0.0,
        };
        let r = chain_rule_residual(&g, &p, &StratonovichConfig::left(&p)).unwrap();
        assert!(r < 1e-12);
    }

    #[test]
    fn time_derivative_is_integrated() {
        // G = t^2 on any path: ∫ 2t dt by left sums misses exactly Σ Δt^2.
        let p = path();
        let g = ChainRuleFn {
            value: &|_, t| t * t,
            dx: &|_, _| 0.0,
            dt: &|_, t| 2.0 * t,
        };
        let r = chain_rule_residual(&g, &p, &StratonovichConfig::left(&p)).unwrap();
        assert!((r - 1.0 / 256.0).abs() < 1e-12);
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let p = path();
        let cfg = StratonovichConfig::new(0.0, 3).unwrap();
        assert!(matches!(
            stratonovich_integral(&vec![1.0; p.len()], &p, &cfg),
            Err(HermiteError::GridMismatch(_))
        ));
        let cfg = StratonovichConfig::new(0.0, 4).unwrap();
        assert!(matches!(
            stratonovich_integral(&[1.0; 3], &p, &cfg),
            Err(HermiteError::GridMismatch(_))
        ));
        assert!(StratonovichConfig::new(1.5, 4).is_err());
    }

    #[test]
    fn quadratic_midpoint_beats_left_point() {
        let p = path();
        let cfg_left = StratonovichConfig::new(0.0, 16).unwrap();
        let cfg_mid = StratonovichConfig::new(0.5, 16).unwrap();
        let g = ChainRuleFn {
            value: &|x, _| 0.5 * x * x,
            dx: &|x, _| x,
            dt: &|_, _| 0.0,
        };
        let left = chain_rule_residual(&g, &p, &cfg_left).unwrap();
        let mid = chain_rule_residual(&g, &p, &cfg_mid).unwrap();
        assert!(mid < left);
    }
}
