use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{HermiteError, Result};
use crate::market::{riskless_price, AssetPath, MarketSpec};
use crate::simulate::interpolate_clamped;

/// `Λ(t,T) = M(t)/M(T) = exp(-(r^cum(T) - r^cum(t)))`.
pub fn bond_price(market: &MarketSpec, t: f64, maturity: f64) -> Result<f64> {
    if !(t >= 0.0 && maturity >= t) {
        return Err(HermiteError::InvalidInput(format!(
            "bond needs 0 <= t <= T, got t = {t}, T = {maturity}"
        )));
    }
    Ok((-(market.riskless_cumulative(maturity) - market.riskless_cumulative(t))).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub t: f64,
    #[serde(rename = "T")]
    pub maturity: f64,
    pub discount: f64,
    /// Instantaneous Hermite rate at the maturity.
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermStructure {
    pub anchors: Vec<f64>,
    pub maturities: Vec<f64>,
    /// `discount[i][j] = Λ(anchors[i], maturities[j])`, `None` when `T < t`.
    pub discount: Vec<Vec<Option<f64>>>,
    /// Instantaneous riskless Hermite rate at each maturity.
    pub rates: Vec<f64>,
}

pub fn term_structure(market: &MarketSpec, anchors: &[f64], maturities: &[f64]) -> Result<TermStructure> {
    if anchors.is_empty() || maturities.is_empty() {
        return Err(HermiteError::InvalidInput(
            "term structure needs anchors and maturities".into(),
        ));
    }
    if let Some(t) = anchors.iter().chain(maturities).find(|t| !(**t >= 0.0)) {
        return Err(HermiteError::InvalidInput(format!("curve times must be >= 0, got {t}")));
    }
    let discount = anchors
        .iter()
        .map(|&t| {
            maturities
                .iter()
                .map(|&m| (m >= t).then(|| bond_price(market, t, m)).transpose())
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TermStructure {
        anchors: anchors.to_vec(),
        maturities: maturities.to_vec(),
        discount,
        rates: maturities.iter().map(|&m| market.riskless_instantaneous(m)).collect(),
    })
}

impl TermStructure {
    /// Flat `{t, T, discount, rate}` records for every defined entry.
    pub fn points(&self) -> Vec<CurvePoint> {
        let mut out = Vec::new();
        for (i, &t) in self.anchors.iter().enumerate() {
            for (j, &m) in self.maturities.iter().enumerate() {
                if let Some(d) = self.discount[i][j] {
                    out.push(CurvePoint {
                        t,
                        maturity: m,
                        discount: d,
                        rate: self.rates[j],
                    });
                }
            }
        }
        out
    }

    /// `T,discount,rate` rows for the first anchor.
    pub fn curve_csv(&self) -> String {
        let mut out = String::from("T,discount,rate\n");
        for (j, &m) in self.maturities.iter().enumerate() {
            if let Some(d) = self.discount[0][j] {
                let _ = writeln!(out, "{m},{d},{}", self.rates[j]);
            }
        }
        out
    }

    /// Discount matrix with a maturity header row; undefined entries empty.
    pub fn matrix_csv(&self) -> String {
        let mut out = String::from("t");
        for m in &self.maturities {
            let _ = write!(out, ",{m}");
        }
        out.push('\n');
        for (t, row) in self.anchors.iter().zip(&self.discount) {
            let _ = write!(out, "{t}");
            for d in row {
                match d {
                    Some(v) => {
                        let _ = write!(out, ",{v}");
                    }
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// `F(t,T) = S(t) / Λ(t,T)` (with `M(0) = 1`).
pub fn forward_price(market: &MarketSpec, spot: f64, t: f64, maturity: f64) -> Result<f64> {
    Ok(spot / bond_price(market, t, maturity)?)
}

fn path_value(path: &AssetPath, u: f64) -> Result<f64> {
    let (first, last) = (path.times[0], *path.times.last().expect("non-empty path"));
    if u < first - 1e-12 || u > last + 1e-12 {
        return Err(HermiteError::InvalidInput(format!("path does not cover time {u}")));
    }
    Ok(interpolate_clamped(&path.times, &path.values, u))
}

/// `P(u) = -S(u) + F(t,T) Λ(u,T)` for `u <= T`, continued for `u > T` by
/// rolling the bond payoff into the riskless asset. `F Λ(u,T)` is formed as
/// `S(t) Λ(u,T)/Λ(t,T)` so the inception value is exactly zero.
pub fn forward_value(market: &MarketSpec, path: &AssetPath, t: f64, maturity: f64, u: f64) -> Result<f64> {
    if u < t {
        return Err(HermiteError::InvalidInput(format!(
            "valuation time {u} precedes inception {t}"
        )));
    }
    let s_t = path_value(path, t)?;
    let s_u = path_value(path, u)?;
    let lam_t = bond_price(market, t, maturity)?;
    let carry = if u <= maturity {
        bond_price(market, u, maturity)? / lam_t
    } else {
        (market.riskless_cumulative(u) - market.riskless_cumulative(t)).exp()
    };
    Ok(-s_u + s_t * carry)
}

/// Same value from the replicating portfolio: short one share at `t`, the
/// proceeds buy `S(t)/Λ(t,T)` bonds, which pay into the riskless asset at `T`.
pub fn forward_value_portfolio(market: &MarketSpec, path: &AssetPath, t: f64, maturity: f64, u: f64) -> Result<f64> {
    if u < t {
        return Err(HermiteError::InvalidInput(format!(
            "valuation time {u} precedes inception {t}"
        )));
    }
    let s_t = path_value(path, t)?;
    let s_u = path_value(path, u)?;
    let bonds = s_t / bond_price(market, t, maturity)?;
    let holding = if u <= maturity {
        bonds * bond_price(market, u, maturity)?
    } else {
        bonds * riskless_price(market, u) / riskless_price(market, maturity)
    };
    Ok(holding - s_u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::HermiteSpec;
    use approx::assert_relative_eq;

    fn market() -> MarketSpec {
        MarketSpec::single(HermiteSpec::new(0.7, 1).unwrap(), 0.05, 0.09, 0.0, 0.2, 1.0).unwrap()
    }

    fn path() -> AssetPath {
        let times: Vec<f64> = (0..=40).map(|k| k as f64 * 0.1).collect();
        let values = times.iter().map(|t| 100.0 + 3.0 * (2.0 * t).sin()).collect();
        AssetPath { times, values }
    }

    #[test]
    fn bond_identities() {
        let m = market();
        assert_eq!(bond_price(&m, 1.3, 1.3).unwrap(), 1.0);
        let d = m.constants.d_const;
        assert_relative_eq!(
            bond_price(&m, 0.5, 2.0).unwrap(),
            (-d * 0.05 * (2f64.powf(1.4) - 0.5f64.powf(1.4))).exp(),
            max_relative = 1e-12
        );
        let prod = bond_price(&m, 0.5, 1.1).unwrap() * bond_price(&m, 1.1, 2.0).unwrap();
        assert_relative_eq!(prod, bond_price(&m, 0.5, 2.0).unwrap(), max_relative = 1e-12);
        assert!(bond_price(&m, 2.0, 1.0).is_err());
    }

    #[test]
    fn term_structure_layout() {
        let m = market();
        let ts = term_structure(&m, &[0.0, 1.0], &[0.5, 1.0, 2.0]).unwrap();
        assert_eq!(ts.discount[1][0], None);
        assert_eq!(ts.discount[1][1], Some(1.0));
        assert_eq!(ts.points().len(), 5);
        let csv = ts.curve_csv();
        assert!(csv.starts_with("T,discount,rate\n"));
        assert_eq!(csv.lines().count(), 4);
        let json = serde_json::to_string(&ts.points()[0]).unwrap();
        assert!(json.contains("\"T\":"));
        assert!(ts.matrix_csv().lines().nth(2).unwrap().starts_with("1,,"));
    }

    #[test]
    fn forward_identities() {
        let m = market();
        let p = path();
        let (t, mat) = (0.5, 2.0);
        assert_eq!(forward_value(&m, &p, t, mat, t).unwrap(), 0.0);
        let f = forward_price(&m, path_value(&p, t).unwrap(), t, mat).unwrap();
        assert_relative_eq!(
            forward_value(&m, &p, t, mat, mat).unwrap(),
            f - path_value(&p, mat).unwrap(),
            max_relative = 1e-12
        );
        let u = 3.5;
        let cont = -path_value(&p, u).unwrap()
            + path_value(&p, t).unwrap() * (m.riskless_cumulative(u) - m.riskless_cumulative(t)).exp();
        assert_relative_eq!(forward_value(&m, &p, t, mat, u).unwrap(), cont, max_relative = 1e-12);
        for k in 5..=40 {
            let u = k as f64 * 0.1;
            let a = forward_value(&m, &p, t, mat, u).unwrap();
            let b = forward_value_portfolio(&m, &p, t, mat, u).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{u}: {a} vs {b}");
        }
        assert!(forward_value(&m, &p, t, mat, 0.1).is_err());
        assert!(forward_value(&m, &p, t, mat, 9.0).is_err());
    }
}
