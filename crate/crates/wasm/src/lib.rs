//! Browser bindings. Every export returns a JSON string so the page needs no
//! glue beyond `JSON.parse`.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use hermite_core::kernel::normalizing_constant;
use hermite_core::market::MarketSpec;
use hermite_core::pricing::{power_derivative_beta, price_characteristics, term_structure, Payoff};
use hermite_core::simulate::HermiteSimulator;
use hermite_core::{par, HermiteSpec};
use serde_json::json;
use wasm_bindgen::prelude::*;

const MAX_POINTS: usize = 1 << 16;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

pub fn simulate_json(
    hurst: f64,
    order: u32,
    steps: usize,
    horizon: f64,
    paths: usize,
    seed: u64,
) -> Result<String, String> {
    let spec = HermiteSpec::new(hurst, order).map_err(err)?;
    if paths == 0 || paths > 16 {
        return Err("paths must be between 1 and 16".into());
    }
    if (steps as f64) * horizon * paths as f64 > MAX_POINTS as f64 {
        return Err(format!("at most {MAX_POINTS} points per request"));
    }
    let sim = HermiteSimulator::new(spec, steps, horizon).map_err(err)?;
    let family = par::map_indexed(paths, |i| sim.path(seed, i as u64));
    let constants = normalizing_constant(&spec).map_err(err)?;
    Ok(json!({
        "times": family[0].times,
        "paths": family.iter().map(|p| &p.values).collect::<Vec<_>>(),
        "c_norm": constants.c_norm,
        "d_const": constants.d_const,
    })
    .to_string())
}

pub fn curve_json(hurst: f64, order: u32, rate: f64, max_maturity: f64, points: usize) -> Result<String, String> {
    let spec = HermiteSpec::new(hurst, order).map_err(err)?;
    if !(max_maturity > 0.0) || !(2..=2000).contains(&points) {
        return Err("need max_maturity > 0 and 2 <= points <= 2000".into());
    }
    let market = MarketSpec::single(spec, rate, 0.0, 0.0, 0.2, 1.0).map_err(err)?;
    let maturities: Vec<f64> = (1..=points).map(|i| max_maturity * i as f64 / points as f64).collect();
    let ts = term_structure(&market, &[0.0], &maturities).map_err(err)?;
    Ok(json!({
        "maturities": ts.maturities,
        "discount": ts.discount[0],
        "rate": ts.rates,
    })
    .to_string())
}

#[allow(clippy::too_many_arguments)]
pub fn power_price_json(
    hurst: f64,
    order: u32,
    rate: f64,
    dividend: f64,
    alpha: f64,
    s0: f64,
    maturity: f64,
    points: usize,
) -> Result<String, String> {
    let spec = HermiteSpec::new(hurst, order).map_err(err)?;
    if !(s0 > 0.0) || !(maturity >= 0.0) || !(2..=2000).contains(&points) {
        return Err("need s0 > 0, maturity >= 0 and 2 <= points <= 2000".into());
    }
    let market = MarketSpec::single(spec, rate, 0.0, dividend, 0.2, s0).map_err(err)?;
    let payoff = Payoff::PowerProduct { alpha: vec![alpha] };
    let times: Vec<f64> = (0..points).map(|i| maturity * i as f64 / (points - 1) as f64).collect();
    let prices = times
        .iter()
        .map(|&t| price_characteristics(&payoff, &market, t, maturity, &[s0]))
        .collect::<hermite_core::Result<Vec<f64>>>()
        .map_err(err)?;
    let beta = power_derivative_beta(&[alpha], &market).map_err(err)?;
    Ok(json!({
        "times": times,
        "prices": prices,
        "beta": beta.constant,
    })
    .to_string())
}

/// Sample paths on `[0, horizon]` with `steps` points per unit time.
#[wasm_bindgen]
pub fn simulate(
    hurst: f64,
    order: u32,
    steps: usize,
    horizon: f64,
    paths: usize,
    seed: u64,
) -> Result<String, JsError> {
    simulate_json(hurst, order, steps, horizon, paths, seed).map_err(|e| JsError::new(&e))
}

/// Discount curve and instantaneous rate for a constant basic rate.
#[wasm_bindgen]
pub fn curve(hurst: f64, order: u32, rate: f64, max_maturity: f64, points: usize) -> Result<String, JsError> {
    curve_json(hurst, order, rate, max_maturity, points).map_err(|e| JsError::new(&e))
}

/// Price of the payoff `x^alpha` at spot `s0` as the valuation time runs to maturity.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn power_price(
    hurst: f64,
    order: u32,
    rate: f64,
    dividend: f64,
    alpha: f64,
    s0: f64,
    maturity: f64,
    points: usize,
) -> Result<String, JsError> {
    power_price_json(hurst, order, rate, dividend, alpha, s0, maturity, points).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn parse(s: &str) -> Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn simulate_shapes_and_determinism() {
        let a = simulate_json(0.7, 2, 64, 2.0, 3, 5).unwrap();
        assert_eq!(a, simulate_json(0.7, 2, 64, 2.0, 3, 5).unwrap());
        let v = parse(&a);
        let n = v["times"].as_array().unwrap().len();
        assert_eq!(n, 129);
        assert_eq!(v["paths"].as_array().unwrap().len(), 3);
        assert_eq!(v["paths"][1].as_array().unwrap().len(), n);
        assert_eq!(v["paths"][0][0].as_f64(), Some(0.0));
    }

    #[test]
    fn simulate_rejects_bad_input() {
        assert!(simulate_json(0.4, 1, 64, 1.0, 1, 0).is_err());
        assert!(simulate_json(0.7, 1, 64, 1.0, 0, 0).is_err());
        assert!(simulate_json(0.7, 1, 1 << 20, 1.0, 1, 0).is_err());
    }

    #[test]
    fn curve_discount_decreases() {
        let v = parse(&curve_json(0.7, 1, 0.03, 5.0, 20).unwrap());
        let d: Vec<f64> = v["discount"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_f64().unwrap())
            .collect();
        assert_eq!(d.len(), 20);
        assert!(d.windows(2).all(|w| w[1] < w[0]));
        assert!(d.iter().all(|&x| x > 0.0 && x < 1.0));
    }

    #[test]
    fn power_price_hits_payoff_at_maturity() {
        let v = parse(&power_price_json(0.7, 1, 0.02, 0.0, 1.5, 1.3, 1.0, 11).unwrap());
        let p = v["prices"].as_array().unwrap();
        let last = p.last().unwrap().as_f64().unwrap();
        assert!((last - 1.3f64.powf(1.5)).abs() < 1e-12);
        assert!((v["beta"].as_f64().unwrap() + 1.5 - 1.0).abs() < 1e-15);
    }
}
