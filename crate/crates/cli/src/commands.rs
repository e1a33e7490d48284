use std::fs;
use std::path::Path;

use hermite_core::config::RunConfig;
use hermite_core::io::Series;
use hermite_core::kernel::{eval_kernel, kernel_l2_norm_sq, normalizing_constant, NormConfig};
use hermite_core::market::{stock_paths, MarketSpec};
use hermite_core::pricing::{
    bond_price, forward_price, forward_value, forward_value_portfolio, futures_march, futures_residual,
    power_derivative_beta, price_characteristics, price_fd, term_structure, FuturesGrid, Payoff, PricingGrid,
};
use hermite_core::simulate::{subordinate_indexed, HermiteSimulator, SamplePath};
use hermite_core::stats::{default_scales, estimate_hurst, estimate_hurst_series, qv_scaling_exponent};
use hermite_core::{par, HermiteError, HermiteSpec, Result};
use serde_json::json;

use crate::output::Output;
use crate::{MarketArgs, Method, ProcessArgs};

pub struct Ctx<'a> {
    pub config: Option<&'a RunConfig>,
    pub seed: u64,
}

impl Ctx<'_> {
    fn run_steps(&self, flag: Option<usize>, default: usize) -> usize {
        flag.or_else(|| self.config.and_then(|c| c.run.steps))
            .unwrap_or(default)
    }

    fn run_horizon(&self, flag: Option<f64>) -> f64 {
        flag.or_else(|| self.config.and_then(|c| c.run.horizon)).unwrap_or(1.0)
    }

    fn run_paths(&self, flag: Option<usize>, default: usize) -> usize {
        flag.or_else(|| self.config.and_then(|c| c.run.paths))
            .unwrap_or(default)
    }

    fn spec(&self, p: &ProcessArgs) -> Result<HermiteSpec> {
        let from_config = self.config.and_then(|c| c.process);
        let hurst = p.hurst.or(from_config.map(|s| s.hurst())).ok_or_else(|| {
            HermiteError::InvalidInput("missing Hurst index: pass --hurst or set `hurst` in [process]".into())
        })?;
        let order = p.order.or(from_config.map(|s| s.order())).unwrap_or(1);
        HermiteSpec::new(hurst, order)
    }

    fn market(&self, m: &MarketArgs) -> Result<MarketSpec> {
        match (m.rate, self.config.and_then(|c| c.market.as_ref())) {
            (None, Some(market)) => {
                if m.process.hurst.is_some() || m.process.order.is_some() {
                    let spec = self.spec(&m.process)?;
                    return MarketSpec::new(
                        spec,
                        market.riskless.clone(),
                        market.assets.clone(),
                        market.volatility.clone(),
                    );
                }
                Ok(market.clone())
            }
            (Some(r), _) => MarketSpec::single(self.spec(&m.process)?, r, m.drift, m.dividend, m.sigma, m.s0),
            (None, None) => Err(HermiteError::InvalidInput(
                "missing market: pass --rate (single asset) or a --config with [riskless], [asset.N] and [volatility]"
                    .into(),
            )),
        }
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(HermiteError::InvalidInput(format!("{name} must be positive, got {v}")))
    }
}

fn simulate_family(
    spec: &HermiteSpec,
    steps: usize,
    horizon: f64,
    paths: usize,
    method: Method,
    seed: u64,
) -> Result<Vec<SamplePath>> {
    match method {
        Method::Invariance => {
            let sim = HermiteSimulator::new(*spec, steps, horizon)?;
            Ok(par::map_indexed(paths, |i| sim.path(seed, i as u64)))
        }
        Method::Exact => {
            if spec.order() != 1 {
                return Err(HermiteError::InvalidInput(
                    "--method exact simulates fractional Brownian motion; use --order 1".into(),
                ));
            }
            let sim = HermiteSimulator::exact_fbm(spec.hurst(), steps, horizon)?;
            Ok(par::map_indexed(paths, |i| sim.path(seed, i as u64)))
        }
        Method::Subordinated => par::map_indexed(paths, |i| subordinate_indexed(spec, steps, horizon, seed, i as u64))
            .into_iter()
            .collect(),
    }
}

pub fn simulate(
    ctx: &Ctx<'_>,
    out: &mut Output,
    process: &ProcessArgs,
    steps: Option<usize>,
    horizon: Option<f64>,
    paths: Option<usize>,
    method: Method,
) -> Result<()> {
    let spec = ctx.spec(process)?;
    let steps = ctx.run_steps(steps, 1024);
    let horizon = ctx.run_horizon(horizon);
    let paths = ctx.run_paths(paths, 1);
    if paths == 0 {
        return Err(HermiteError::InvalidInput("--paths must be at least 1".into()));
    }
    let family = simulate_family(&spec, steps, horizon, paths, method, ctx.seed)?;
    for (k, p) in family.iter().enumerate() {
        out.csv(&format!("path_{k}.csv"), &p.to_csv())?;
    }

    let mut summary = json!({
        "hurst": spec.hurst(),
        "order": spec.order(),
        "steps_per_unit": steps,
        "horizon": horizon,
        "paths": paths,
        "method": family[0].method,
    });
    if family[0].horizon() >= 1.0 - 1e-12 {
        // Known zero mean, so the second moment estimates the variance.
        let sq: Vec<f64> = family.iter().map(|p| p.value_at(1.0).powi(2)).collect();
        let m = sq.len() as f64;
        let var = sq.iter().sum::<f64>() / m;
        summary["variance_at_1"] = json!(var);
        if sq.len() > 1 {
            let s2 = sq.iter().map(|s| (s - var).powi(2)).sum::<f64>() / (m - 1.0);
            summary["variance_at_1_std_error"] = json!((s2 / m).sqrt());
        }
    }
    out.json("summary.json", summary)?;
    let series: Vec<Series> = family
        .iter()
        .enumerate()
        .map(|(k, p)| Series {
            name: format!("path_{k}"),
            points: p.times.iter().copied().zip(p.values.iter().copied()).collect(),
        })
        .collect();
    out.plot("paths.plot.csv", &series)
}

pub fn kernel(ctx: &Ctx<'_>, out: &mut Output, process: &ProcessArgs, t: f64, point: Option<&[f64]>) -> Result<()> {
    let spec = ctx.spec(process)?;
    check_positive("--t", t)?;
    let cfg = NormConfig {
        seed: ctx.seed,
        ..NormConfig::default()
    };
    let constants = normalizing_constant(&spec)?;
    let norm = kernel_l2_norm_sq(&spec, t, &cfg)?;
    let mut body = json!({
        "hurst": spec.hurst(),
        "order": spec.order(),
        "c_norm": constants.c_norm,
        "d_const": constants.d_const,
        "l2_norm_at_1": constants.l2_norm_at_1,
        "t": t,
        "norm_sq": norm.value,
        "norm_sq_error": norm.error,
        "norm_method": norm.method,
    });
    if let Some(v) = point {
        body["point"] = json!(v);
        body["kernel_value"] = json!(eval_kernel(&spec, t, v)?);
    }
    out.json("kernel.json", body)
}

fn read_path_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = fs::read_to_string(path)
        .map_err(|e| HermiteError::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("t,value") {
        return Err(HermiteError::InvalidInput(format!(
            "{}: expected header `t,value`",
            path.display()
        )));
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let parsed: Option<(f64, f64)> = line
            .split_once(',')
            .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)));
        let (t, v) = parsed.ok_or_else(|| {
            HermiteError::InvalidInput(format!("{}:{}: expected two numbers `t,value`", path.display(), i + 2))
        })?;
        times.push(t);
        values.push(v);
    }
    Ok((times, values))
}

pub fn estimate(
    ctx: &Ctx<'_>,
    out: &mut Output,
    input: Option<&Path>,
    process: &ProcessArgs,
    steps: Option<usize>,
    horizon: Option<f64>,
) -> Result<()> {
    let (est, source) = match input {
        Some(path) => {
            let (times, values) = read_path_csv(path)?;
            if times.len() < 3 {
                return Err(HermiteError::InvalidInput("input path needs at least 3 points".into()));
            }
            let dt = times[1] - times[0];
            let uniform = times
                .windows(2)
                .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt.abs().max(1.0));
            if !(dt > 0.0) || !uniform {
                return Err(HermiteError::GridMismatch(
                    "input path must be on a uniform increasing grid".into(),
                ));
            }
            let name = path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            (
                estimate_hurst_series(&values, dt, &default_scales(values.len()))?,
                json!({ "input": name }),
            )
        }
        None => {
            let spec = ctx.spec(process)?;
            let steps = ctx.run_steps(steps, 1 << 14);
            let horizon = ctx.run_horizon(horizon);
            let path = simulate_family(&spec, steps, horizon, 1, Method::Invariance, ctx.seed)?.remove(0);
            let source = json!({ "simulated": { "hurst": spec.hurst(), "order": spec.order(), "steps_per_unit": steps, "horizon": horizon } });
            (estimate_hurst(&path, &default_scales(path.len()))?, source)
        }
    };
    if est.out_of_domain {
        eprintln!("warning: estimated Hurst index {} lies outside (1/2, 1)", est.h_hat);
    }
    out.json(
        "estimate.json",
        json!({
            "h_hat": est.h_hat,
            "std_error": est.std_error,
            "scales_used": est.scales_used,
            "out_of_domain": est.out_of_domain,
            "source": source,
        }),
    )
}

pub fn qv(
    ctx: &Ctx<'_>,
    out: &mut Output,
    process: &ProcessArgs,
    n_list: &[usize],
    gamma: f64,
    paths: Option<usize>,
) -> Result<()> {
    let spec = ctx.spec(process)?;
    check_positive("--gamma", gamma)?;
    let paths = ctx.run_paths(paths, 400);
    let fit = qv_scaling_exponent(&spec, n_list, gamma, paths, ctx.seed)?;
    let rows: Vec<Vec<f64>> = fit
        .points
        .iter()
        .map(|p| vec![(p.n_blocks as f64).ln(), p.value.ln()])
        .collect();
    out.csv(
        "scaling.csv",
        &hermite_core::io::csv_table(&["logN", "log_delta"], &rows),
    )?;
    out.json(
        "fit.json",
        json!({
            "hurst": spec.hurst(),
            "order": spec.order(),
            "block_length": gamma,
            "mc_paths": paths,
            "slope": fit.slope,
            "slope_std_error": fit.std_error,
            "intercept": fit.intercept,
            "theoretical_slope": fit.theoretical,
            "points": fit.points,
        }),
    )
}

pub fn bond(ctx: &Ctx<'_>, out: &mut Output, market: &MarketArgs, t: f64, maturity: f64) -> Result<()> {
    let m = ctx.market(market)?;
    let discount = bond_price(&m, t, maturity)?;
    out.json(
        "bond.json",
        json!({
            "t": t,
            "T": maturity,
            "discount": discount,
            "d_const": m.constants.d_const,
        }),
    )
}

#[allow(clippy::too_many_arguments)]
pub fn perpetual(
    ctx: &Ctx<'_>,
    out: &mut Output,
    market: &MarketArgs,
    alpha: Option<Vec<f64>>,
    t: f64,
    maturity: f64,
    nx: usize,
    nt: usize,
) -> Result<()> {
    let m = ctx.market(market)?;
    let alpha = alpha.unwrap_or_else(|| vec![1.0; m.dim()]);
    if alpha.len() != m.dim() {
        return Err(HermiteError::DimensionMismatch {
            expected: m.dim(),
            got: alpha.len(),
        });
    }
    if !(t >= 0.0 && maturity >= t) {
        return Err(HermiteError::InvalidInput(format!(
            "need 0 <= t <= T, got t = {t}, T = {maturity}"
        )));
    }
    let payoff = Payoff::PowerProduct { alpha: alpha.clone() };
    let spot: Vec<f64> = m.assets.iter().map(|a| a.initial_price).collect();
    let value = price_characteristics(&payoff, &m, t, maturity, &spot)?;
    let beta = power_derivative_beta(&alpha, &m)?;
    let mut body = json!({
        "alpha": alpha,
        "t": t,
        "T": maturity,
        "spot": spot,
        "value": value,
        "beta": beta.at(&m, t.max(1e-12)),
        "beta_constant": beta.constant,
        "admissible": beta.admissible,
    });
    if m.dim() == 1 {
        let grid = PricingGrid {
            t0: t,
            horizon: maturity,
            x_min: spot[0] / 2.0,
            x_max: spot[0] * 2.0,
            nx,
            nt,
        };
        let field = price_fd(&payoff, &m, &grid)?;
        let mut sup: f64 = 0.0;
        for (k, &tk) in field.times.iter().enumerate() {
            for (i, &x) in field.prices.iter().enumerate() {
                let exact = price_characteristics(&payoff, &m, tk, maturity, &[x])?;
                sup = sup.max((field.values[k][i] - exact).abs());
            }
        }
        body["fd_sup_error"] = json!(sup);
        body["fd_time_steps"] = json!(field.nt_used);
        out.csv("perpetual.csv", &field.to_csv())?;
    }
    out.json("perpetual.json", body)
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let i = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1);
    let w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    ys[i - 1] + w * (ys[i] - ys[i - 1])
}

fn driver_paths(m: &MarketSpec, steps: usize, horizon: f64, seed: u64) -> Result<Vec<SamplePath>> {
    let sim = HermiteSimulator::new(m.spec, steps, horizon)?;
    Ok((0..m.dim()).map(|j| sim.path(seed, j as u64)).collect())
}

pub fn forward(
    ctx: &Ctx<'_>,
    out: &mut Output,
    market: &MarketArgs,
    t: f64,
    maturity: f64,
    steps: Option<usize>,
    asset: usize,
) -> Result<()> {
    let m = ctx.market(market)?;
    if asset >= m.dim() {
        return Err(HermiteError::InvalidInput(format!(
            "--asset {asset} out of range for {} asset(s)",
            m.dim()
        )));
    }
    if !(t >= 0.0 && maturity > t) {
        return Err(HermiteError::InvalidInput(format!(
            "need 0 <= t < T, got t = {t}, T = {maturity}"
        )));
    }
    let steps = ctx.run_steps(steps, 256);
    let drivers = driver_paths(&m, steps, maturity, ctx.seed)?;
    let path = stock_paths(&m, &drivers)?.swap_remove(asset);
    let spot = path.values[0];
    let s_t = interpolate(&path.times, &path.values, t);
    let fwd = forward_price(&m, s_t, t, maturity)?;
    let mut rows = Vec::new();
    for &u in path.times.iter().filter(|&&u| u >= t && u <= maturity) {
        rows.push(vec![
            u,
            forward_value(&m, &path, t, maturity, u)?,
            forward_value_portfolio(&m, &path, t, maturity, u)?,
        ]);
    }
    out.csv(
        "forward.csv",
        &hermite_core::io::csv_table(&["u", "value", "value_portfolio"], &rows),
    )?;
    out.json(
        "forward.json",
        json!({
            "asset": asset,
            "t": t,
            "T": maturity,
            "initial_price": spot,
            "spot_at_t": s_t,
            "forward_price": fwd,
            "inception_value": forward_value(&m, &path, t, maturity, t)?,
        }),
    )?;
    let series = [Series {
        name: "value".into(),
        points: rows.iter().map(|r| (r[0], r[1])).collect(),
    }];
    out.plot("forward.plot.csv", &series)
}

#[allow(clippy::too_many_arguments)]
pub fn futures(
    ctx: &Ctx<'_>,
    out: &mut Output,
    market: &MarketArgs,
    nx: usize,
    nt: usize,
    horizon: Option<f64>,
    level: f64,
    slope: f64,
) -> Result<()> {
    let m = ctx.market(market)?;
    let horizon = ctx.run_horizon(horizon);
    check_positive("--horizon", horizon)?;
    if nt < 2 || nx < 2 {
        return Err(HermiteError::InvalidInput("--nx and --nt must be at least 2".into()));
    }
    // Simulate on [0, 1] with nt steps and rescale by self-similarity.
    let sim = HermiteSimulator::new(m.spec, nt, 1.0)?;
    let base = sim.path(ctx.seed, 0);
    let scale = horizon.powf(m.spec.hurst());
    let driver = SamplePath::new(
        base.times.iter().map(|t| t * horizon).collect(),
        base.values.iter().map(|v| v * scale).collect(),
        m.spec,
        base.method,
        ctx.seed,
    )?;
    let mut drivers = vec![driver.clone(); m.dim()];
    for (j, d) in drivers.iter_mut().enumerate().skip(1) {
        let p = sim.path(ctx.seed, j as u64);
        d.values = p.values.iter().map(|v| v * scale).collect();
    }
    let stock = stock_paths(&m, &drivers)?.swap_remove(0);
    let lo = stock.values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = stock.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let grid = FuturesGrid {
        x_min: 0.9 * lo,
        x_max: 1.1 * hi,
        nx,
        nt,
        horizon,
    };
    let field = futures_march(&|x| level + slope * x, &stock.values, &m, &grid)?;
    let residual = futures_residual(&field, &m)?;
    let sup = residual.iter().map(|r| r.abs()).fold(0.0, f64::max);

    let mut csv = String::from("t");
    for x in &field.x {
        csv.push_str(&format!(",{x}"));
    }
    csv.push('\n');
    for (t, row) in field.times.iter().zip(&field.psi) {
        csv.push_str(&t.to_string());
        for v in row {
            csv.push_str(&format!(",{v}"));
        }
        csv.push('\n');
    }
    out.csv("futures.csv", &csv)?;
    out.json(
        "futures.json",
        json!({
            "grid": grid,
            "psi0_level": level,
            "psi0_slope": slope,
            "residual_sup": sup,
            "integral_at_horizon": field.integral.last(),
        }),
    )?;
    let series = [
        Series {
            name: "path".into(),
            points: field.times.iter().copied().zip(field.path.iter().copied()).collect(),
        },
        Series {
            name: "residual".into(),
            points: field.times.iter().copied().zip(residual.iter().copied()).collect(),
        },
    ];
    out.plot("futures.plot.csv", &series)
}

pub fn curve(
    ctx: &Ctx<'_>,
    out: &mut Output,
    market: &MarketArgs,
    anchors: &[f64],
    maturities: Option<Vec<f64>>,
    max_maturity: f64,
    points: usize,
) -> Result<()> {
    let m = ctx.market(market)?;
    let maturities = match maturities {
        Some(v) => v,
        None => {
            check_positive("--max-maturity", max_maturity)?;
            if points == 0 {
                return Err(HermiteError::InvalidInput("--points must be at least 1".into()));
            }
            (1..=points).map(|k| max_maturity * k as f64 / points as f64).collect()
        }
    };
    let ts = term_structure(&m, anchors, &maturities)?;
    if ts.discount[0].iter().all(Option::is_none) {
        eprintln!("warning: no maturity lies after the first anchor; curve.csv not written");
    } else {
        out.csv("curve.csv", &ts.curve_csv())?;
    }
    if anchors.len() > 1 {
        out.csv("curve_matrix.csv", &ts.matrix_csv())?;
    }
    out.json(
        "curve.json",
        json!({ "points": ts.points(), "d_const": m.constants.d_const }),
    )
}
