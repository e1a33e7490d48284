use serde::Serialize;

use super::{riskless_price, MarketSpec};
use crate::error::{HermiteError, Result};
use crate::simulate::{HermiteSimulator, SamplePath};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssetPath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

fn check_drivers(market: &MarketSpec, drivers: &[SamplePath]) -> Result<()> {
    if drivers.len() != market.dim() {
        return Err(HermiteError::DimensionMismatch {
            expected: market.dim(),
            got: drivers.len(),
        });
    }
    if drivers.iter().any(|p| p.times != drivers[0].times) {
        return Err(HermiteError::GridMismatch("drivers must share one time grid".into()));
    }
    Ok(())
}

/// `S_j(t) = S_j(0) exp(μ_j^cum(t) - δ_j^cum(t) + Σ_m σ_jm ℋ_m(t))`.
///
/// Time-dependent volatility has no explicit representation; those markets
/// are integrated with [`stock_paths_sde`] on the full driver grid.
pub fn stock_paths(market: &MarketSpec, drivers: &[SamplePath]) -> Result<Vec<AssetPath>> {
    check_drivers(market, drivers)?;
    if !market.volatility.is_constant() {
        return stock_paths_sde(market, drivers, drivers[0].len() - 1);
    }
    let sigma = market.volatility.at(0.0);
    let times = &drivers[0].times;
    Ok((0..market.dim())
        .map(|j| {
            let s0 = market.assets[j].initial_price;
            let values = times
                .iter()
                .enumerate()
                .map(|(k, &t)| {
                    let noise: f64 = (0..market.dim()).map(|m| sigma[(j, m)] * drivers[m].values[k]).sum();
                    s0 * (market.drift_cumulative(j, t) - market.dividend_cumulative(j, t) + noise).exp()
                })
                .collect();
            AssetPath {
                times: times.clone(),
                values,
            }
        })
        .collect())
}

/// Forward Euler for `dS_j = S_j [d(μ_j^cum - δ_j^cum) + Σ_m σ_jm(t) dℋ_m]`
/// on `refinement` equal steps of the driver grid (left-point Riemann sums).
pub fn stock_paths_sde(market: &MarketSpec, drivers: &[SamplePath], refinement: usize) -> Result<Vec<AssetPath>> {
    check_drivers(market, drivers)?;
    let intervals = drivers[0].len() - 1;
    if refinement == 0 || !intervals.is_multiple_of(refinement) {
        return Err(HermiteError::GridMismatch(format!(
            "refinement {refinement} does not divide the {intervals} driver intervals"
        )));
    }
    let stride = intervals / refinement;
    let d = market.dim();
    let grid: Vec<usize> = (0..=refinement).map(|k| k * stride).collect();
    let times: Vec<f64> = grid.iter().map(|&i| drivers[0].times[i]).collect();
    let mut values: Vec<Vec<f64>> = market.assets.iter().map(|a| vec![a.initial_price]).collect();
    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (ta, tb) = (drivers[0].times[a], drivers[0].times[b]);
        let sigma = market.volatility.at(ta);
        for j in 0..d {
            let drift = (market.drift_cumulative(j, tb) - market.dividend_cumulative(j, tb))
                - (market.drift_cumulative(j, ta) - market.dividend_cumulative(j, ta));
            let noise: f64 = (0..d)
                .map(|m| sigma[(j, m)] * (drivers[m].values[b] - drivers[m].values[a]))
                .sum();
            let s = *values[j].last().expect("seeded with S(0)");
            values[j].push(s * (1.0 + drift + noise));
        }
    }
    Ok(values
        .into_iter()
        .map(|v| AssetPath {
            times: times.clone(),
            values: v,
        })
        .collect())
}

/// Divides each path by `M(t)`.
pub fn deflate(paths: &[AssetPath], market: &MarketSpec) -> Vec<AssetPath> {
    paths
        .iter()
        .map(|p| AssetPath {
            times: p.times.clone(),
            values: p
                .times
                .iter()
                .zip(&p.values)
                .map(|(&t, &v)| v / riskless_price(market, t))
                .collect(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CombinedDriver {
    /// `σ^S = sqrt(Σ σ_k^2)`.
    pub sigma_eff: f64,
    /// `σ_k / σ^S`, unit Euclidean norm.
    pub weights: Vec<f64>,
    /// Weighted Gaussian base; unit-variance fGn again since the bases are
    /// independent.
    pub noise: Vec<f64>,
    pub path: SamplePath,
}

/// Collapses `Σ_k σ_k ℋ_k` into `σ^S ℋ^S` by combining the Gaussian bases
/// that generate the drivers. For `κ = 1` this is exactly the weighted sum
/// of the driver paths; for `κ >= 2` the sum of Hermite motions is not a
/// Hermite motion, so the combination is done one level down.
pub fn combine_drivers(
    sigma_row: &[f64],
    bases: &[Vec<f64>],
    sim: &HermiteSimulator,
    seed: u64,
) -> Result<CombinedDriver> {
    if sigma_row.len() != bases.len() {
        return Err(HermiteError::DimensionMismatch {
            expected: sigma_row.len(),
            got: bases.len(),
        });
    }
    if let Some(b) = bases.iter().find(|b| b.len() != sim.steps()) {
        return Err(HermiteError::GridMismatch(format!(
            "Gaussian base has {} draws, simulator expects {}",
            b.len(),
            sim.steps()
        )));
    }
    let sigma_eff = sigma_row.iter().map(|s| s * s).sum::<f64>().sqrt();
    if !(sigma_eff > 0.0) {
        return Err(HermiteError::InvalidInput("volatility row is identically zero".into()));
    }
    let weights: Vec<f64> = sigma_row.iter().map(|s| s / sigma_eff).collect();
    let noise: Vec<f64> = (0..sim.steps())
        .map(|i| weights.iter().zip(bases).map(|(w, b)| w * b[i]).sum())
        .collect();
    let path = sim.path_from_noise(&noise, seed);
    Ok(CombinedDriver {
        sigma_eff,
        weights,
        noise,
        path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::HermiteSpec;
    use crate::market::{Asset, BasicRate, Volatility};
    use crate::simulate::simulate_fbm_exact;
    use approx::assert_relative_eq;

    fn spec() -> HermiteSpec {
        HermiteSpec::new(0.7, 1).unwrap()
    }

    #[test]
    fn zero_volatility_is_deterministic() {
        let m = MarketSpec::single(spec(), 0.03, 0.07, 0.01, 0.0, 50.0).unwrap();
        let p = simulate_fbm_exact(0.7, 64, 1.0, 3).unwrap();
        let s = stock_paths(&m, std::slice::from_ref(&p)).unwrap();
        for (&t, &v) in s[0].times.iter().zip(&s[0].values) {
            let expected = 50.0 * (m.drift_cumulative(0, t) - m.dividend_cumulative(0, t)).exp();
            assert_relative_eq!(v, expected, max_relative = 1e-14);
        }
    }

    #[test]
    fn deflation_identities() {
        let m = MarketSpec::single(spec(), 0.04, 0.04, 0.0, 0.0, 10.0).unwrap();
        let p = simulate_fbm_exact(0.7, 32, 2.0, 1).unwrap();
        let s = stock_paths(&m, &[p]).unwrap();
        let defl = deflate(&s, &m);
        for v in &defl[0].values {
            assert_relative_eq!(*v, 10.0, max_relative = 1e-12);
        }
        let riskless = AssetPath {
            times: s[0].times.clone(),
            values: s[0].times.iter().map(|&t| riskless_price(&m, t)).collect(),
        };
        for v in &deflate(&[riskless], &m)[0].values {
            assert_relative_eq!(*v, 1.0, max_relative = 1e-15);
        }
    }

    #[test]
    fn euler_route_converges_to_explicit() {
        let m = MarketSpec::single(spec(), 0.03, 0.08, 0.0, 0.3, 1.0).unwrap();
        let p = simulate_fbm_exact(0.7, 4096, 1.0, 8).unwrap();
        let exact = stock_paths(&m, std::slice::from_ref(&p)).unwrap();
        let errs: Vec<f64> = [64, 512, 4096]
            .iter()
            .map(|&r| {
                let e = stock_paths_sde(&m, std::slice::from_ref(&p), r).unwrap();
                let stride = 4096 / r;
                e[0].values
                    .iter()
                    .enumerate()
                    .map(|(k, v)| (v - exact[0].values[k * stride]).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        assert!(errs[1] < errs[0] && errs[2] < errs[1], "{errs:?}");
    }

    #[test]
    fn driver_count_and_grid_are_checked() {
        let m = MarketSpec::single(spec(), 0.03, 0.08, 0.0, 0.3, 1.0).unwrap();
        let a = simulate_fbm_exact(0.7, 16, 1.0, 1).unwrap();
        assert!(stock_paths(&m, &[]).is_err());
        assert!(stock_paths_sde(&m, &[a], 5).is_err());
        let two = MarketSpec::new(
            spec(),
            BasicRate::constant(0.01),
            vec![
                Asset {
                    drift: BasicRate::zero(),
                    dividend: BasicRate::zero(),
                    initial_price: 1.0
                };
                2
            ],
            Volatility::Constant {
                matrix: vec![vec![0.1, 0.0], vec![0.0, 0.1]],
            },
        )
        .unwrap();
        let p = simulate_fbm_exact(0.7, 16, 1.0, 1).unwrap();
        let q = simulate_fbm_exact(0.7, 8, 2.0, 1).unwrap();
        assert!(matches!(stock_paths(&two, &[p, q]), Err(HermiteError::GridMismatch(_))));
    }

    #[test]
    fn combine_drivers_examples() {
        let sim = HermiteSimulator::exact_fbm(0.7, 64, 1.0).unwrap();
        let b1 = sim.noise(5, 0);
        let b2 = sim.noise(5, 1);
        let c = combine_drivers(&[3.0, 4.0], &[b1.clone(), b2.clone()], &sim, 5).unwrap();
        assert_relative_eq!(c.sigma_eff, 5.0);
        assert_relative_eq!(c.weights.iter().map(|w| w * w).sum::<f64>(), 1.0);
        let (p1, p2) = (sim.path_from_noise(&b1, 5), sim.path_from_noise(&b2, 5));
        for k in 0..p1.len() {
            assert_relative_eq!(
                5.0 * c.path.values[k],
                3.0 * p1.values[k] + 4.0 * p2.values[k],
                epsilon = 1e-12
            );
        }
        let single = combine_drivers(&[0.2, 0.0], &[b1.clone(), b2], &sim, 5).unwrap();
        assert_relative_eq!(single.sigma_eff, 0.2);
        assert_eq!(single.path, p1);
        assert!(combine_drivers(&[0.0, 0.0], &[b1.clone(), b1.clone()], &sim, 5).is_err());
    }
}
