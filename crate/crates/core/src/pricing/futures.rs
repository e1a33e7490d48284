use serde::Serialize;

use crate::error::{HermiteError, Result};
use crate::market::MarketSpec;
use crate::simulate::interpolate_clamped;

/// Uniform `(x, t)` lattice: `nx` cells on `[x_min, x_max]`, `nt` steps on
/// `[0, horizon]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FuturesGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub nt: usize,
    pub horizon: f64,
}

impl FuturesGrid {
    pub fn x_nodes(&self) -> Vec<f64> {
        let dx = (self.x_max - self.x_min) / self.nx as f64;
        (0..=self.nx).map(|i| self.x_min + i as f64 * dx).collect()
    }

    pub fn t_nodes(&self) -> Vec<f64> {
        if self.nt == 0 {
            return vec![0.0];
        }
        (0..=self.nt)
            .map(|k| self.horizon * k as f64 / self.nt as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuturesField {
    pub x: Vec<f64>,
    pub times: Vec<f64>,
    /// `psi[k][i] = Ψ(x[i], times[k])`.
    pub psi: Vec<Vec<f64>>,
    /// Underlying path `x(t)` at `times`.
    pub path: Vec<f64>,
    /// `I(t) = ∫_0^t Ψ(x(u), u) du` by the trapezoid rule.
    pub integral: Vec<f64>,
}

impl FuturesField {
    fn check(&self) -> Result<()> {
        if self.psi.len() != self.times.len() || self.path.len() != self.times.len() {
            return Err(HermiteError::GridMismatch(
                "field, path and time grid lengths differ".into(),
            ));
        }
        if self.psi.iter().any(|row| row.len() != self.x.len()) || self.x.len() < 3 {
            return Err(HermiteError::GridMismatch(
                "every field row needs one value per x node (>= 3)".into(),
            ));
        }
        Ok(())
    }
}

/// Trapezoid accumulation of `values` over `times`.
fn cumulative_trapezoid(times: &[f64], values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(times.len());
    let mut acc = 0.0;
    out.push(acc);
    for k in 1..times.len() {
        acc += 0.5 * (values[k - 1] + values[k]) * (times[k] - times[k - 1]);
        out.push(acc);
    }
    out
}

/// Second-order first derivative on a non-uniform grid, written in
/// differences so that constant data gives exactly zero.
fn derivative(nodes: &[f64], f: &[f64], k: usize) -> f64 {
    let n = nodes.len();
    if k == 0 {
        let (h1, h2) = (nodes[1] - nodes[0], nodes[2] - nodes[1]);
        (h1 + h2) / (h1 * h2) * (f[1] - f[0]) - h1 / (h2 * (h1 + h2)) * (f[2] - f[0])
    } else if k == n - 1 {
        let (h1, h2) = (nodes[n - 1] - nodes[n - 2], nodes[n - 2] - nodes[n - 3]);
        -(h1 + h2) / (h1 * h2) * (f[n - 2] - f[n - 1]) + h1 / (h2 * (h1 + h2)) * (f[n - 3] - f[n - 1])
    } else {
        let (h1, h2) = (nodes[k] - nodes[k - 1], nodes[k + 1] - nodes[k]);
        -h2 / (h1 * (h1 + h2)) * (f[k - 1] - f[k]) + h1 / (h2 * (h1 + h2)) * (f[k + 1] - f[k])
    }
}

/// `R(t) = I(t) - Ψ ∂Ψ/∂x - (1/r(t)) Ψ ∂Ψ/∂t` along the path, with `r` the
/// instantaneous riskless Hermite rate.
///
/// The last term equals `∂Φ/∂θ` for `Φ = Ψ²/2` and `θ = r^cum(t)`; it is
/// differenced in `θ`, which stays finite at `t = 0` where `r` vanishes.
/// Spatial derivatives are nodal differences interpolated linearly to `x(t)`.
pub fn futures_residual(field: &FuturesField, market: &MarketSpec) -> Result<Vec<f64>> {
    field.check()?;
    if field.times.len() < 3 {
        return Err(HermiteError::InvalidInput(
            "the residual needs at least 3 time points".into(),
        ));
    }
    let theta: Vec<f64> = field.times.iter().map(|&t| market.riskless_cumulative(t)).collect();
    if theta.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(HermiteError::Degenerate(
            "riskless cumulative rate must increase on the grid".into(),
        ));
    }
    let phi: Vec<Vec<f64>> = field
        .psi
        .iter()
        .map(|row| row.iter().map(|p| 0.5 * p * p).collect())
        .collect();
    let along: Vec<f64> = field
        .psi
        .iter()
        .zip(&field.path)
        .map(|(row, &x)| interpolate_clamped(&field.x, row, x))
        .collect();
    let integral = cumulative_trapezoid(&field.times, &along);
    let last = field.times.len() - 1;
    Ok((0..=last)
        .map(|k| {
            let xs = field.path[k];
            let dphi_dx: Vec<f64> = (0..field.x.len()).map(|i| derivative(&field.x, &phi[k], i)).collect();
            let phi_x = interpolate_clamped(&field.x, &dphi_dx, xs);
            let js: Vec<usize> = match k {
                0 => vec![0, 1, 2],
                k if k == last => vec![k - 2, k - 1, k],
                k => vec![k - 1, k, k + 1],
            };
            let local_theta: Vec<f64> = js.iter().map(|&j| theta[j]).collect();
            let local_phi: Vec<f64> = js.iter().map(|&j| interpolate_clamped(&field.x, &phi[j], xs)).collect();
            let pos = js.iter().position(|&j| j == k).expect("k is in its stencil");
            let phi_theta = derivative(&local_theta, &local_phi, pos);
            integral[k] - phi_x - phi_theta
        })
        .collect())
}

const PSI_FLOOR: f64 = 1e-6;
const CORRECTOR_PASSES: usize = 2;

/// Marches `∂Ψ/∂t = r(t) [I(t) - Ψ ∂Ψ/∂x] / Ψ` from `Ψ(·, 0) = psi0` along the
/// given path `x(t_k)`.
///
/// In `Φ = Ψ²/2` and `θ = r^cum(t)` the equation is the linear transport
/// `Φ_θ + Φ_x = I`, advanced with Lax–Wendroff (Beam–Warming at the outflow
/// node, exact characteristic data at the inflow node). `I` is the trapezoid
/// integral of `Ψ(x(t), t)`, closed by a predictor and two corrector passes.
pub fn futures_march(
    psi0: &dyn Fn(f64) -> f64,
    path: &[f64],
    market: &MarketSpec,
    grid: &FuturesGrid,
) -> Result<FuturesField> {
    if !(grid.x_max > grid.x_min) || grid.nx < 2 || !(grid.horizon >= 0.0) {
        return Err(HermiteError::InvalidInput(
            "futures grid needs x_min < x_max, nx >= 2, horizon >= 0".into(),
        ));
    }
    let times = grid.t_nodes();
    if path.len() != times.len() {
        return Err(HermiteError::GridMismatch(format!(
            "path has {} points, time grid has {}",
            path.len(),
            times.len()
        )));
    }
    if let Some(x) = path.iter().find(|&&x| !(x >= grid.x_min && x <= grid.x_max)) {
        return Err(HermiteError::InvalidInput(format!(
            "path value {x} leaves the x-grid [{}, {}]",
            grid.x_min, grid.x_max
        )));
    }
    let xs = grid.x_nodes();
    let dx = xs[1] - xs[0];
    let psi_init: Vec<f64> = xs.iter().map(|&x| psi0(x)).collect();
    let sign = if psi_init[0] < 0.0 { -1.0 } else { 1.0 };
    if let Some(i) = psi_init.iter().position(|p| !(sign * p > PSI_FLOOR)) {
        return Err(HermiteError::InvalidInput(format!(
            "initial profile must stay away from zero; Ψ({}) = {}",
            xs[i], psi_init[i]
        )));
    }
    let mut psi = vec![psi_init];
    let mut integral = vec![0.0];
    if grid.nt == 0 || grid.horizon == 0.0 {
        return Ok(FuturesField {
            x: xs,
            times,
            psi,
            path: path.to_vec(),
            integral,
        });
    }
    if times.iter().skip(1).any(|&t| !(market.riskless_instantaneous(t) > 0.0)) {
        return Err(HermiteError::Degenerate(
            "instantaneous riskless rate must be positive".into(),
        ));
    }
    let theta: Vec<f64> = times.iter().map(|&t| market.riskless_cumulative(t)).collect();
    let to_phi = |row: &[f64]| -> Vec<f64> { row.iter().map(|p| 0.5 * p * p).collect() };
    // J(θ_k) = ∫_0^θ_k I dθ, accumulated in step with the march.
    let mut source_acc = 0.0;

    for k in 0..grid.nt {
        let phi_k = to_phi(&psi[k]);
        let dtheta = theta[k + 1] - theta[k];
        let dt = times[k + 1] - times[k];
        let along_k = interpolate_clamped(&xs, &psi[k], path[k]);
        let mut i_next = integral[k] + dt * along_k;
        let mut row = Vec::new();
        for _ in 0..=CORRECTOR_PASSES {
            let src = 0.5 * (integral[k] + i_next) * dtheta;
            let inflow_phi = 0.5 * psi0(xs[0] - theta[k + 1]).powi(2) + source_acc + src;
            let phi_next = transport_step(&phi_k, dtheta / dx, src, inflow_phi);
            row = Vec::with_capacity(phi_next.len());
            for (i, &p) in phi_next.iter().enumerate() {
                if !(p > 0.5 * PSI_FLOOR * PSI_FLOOR) {
                    return Err(HermiteError::Numerical(format!(
                        "Ψ reached zero at x = {}, t = {}",
                        xs[i],
                        times[k + 1]
                    )));
                }
                row.push(sign * (2.0 * p).sqrt());
            }
            let along_next = interpolate_clamped(&xs, &row, path[k + 1]);
            i_next = integral[k] + 0.5 * dt * (along_k + along_next);
        }
        source_acc += 0.5 * (integral[k] + i_next) * dtheta;
        psi.push(row);
        integral.push(i_next);
    }
    Ok(FuturesField {
        x: xs,
        times,
        psi,
        path: path.to_vec(),
        integral,
    })
}

/// One θ-step of `Φ_θ + Φ_x = S`, sub-stepped so the Courant number stays
/// at most one. `src` is `∫ S dθ` over the whole step.
fn transport_step(phi: &[f64], courant: f64, src: f64, inflow: f64) -> Vec<f64> {
    let subs = courant.ceil().max(1.0) as usize;
    let nu = courant / subs as f64;
    let piece = src / subs as f64;
    let n = phi.len() - 1;
    let mut cur = phi.to_vec();
    for s in 0..subs {
        let mut next = vec![0.0; n + 1];
        for i in 1..n {
            next[i] = cur[i] - 0.5 * nu * (cur[i + 1] - cur[i - 1])
                + 0.5 * nu * nu * (cur[i + 1] - 2.0 * cur[i] + cur[i - 1])
                + piece;
        }
        next[n] = cur[n] - 0.5 * nu * (3.0 * cur[n] - 4.0 * cur[n - 1] + cur[n - 2])
            + 0.5 * nu * nu * (cur[n] - 2.0 * cur[n - 1] + cur[n - 2])
            + piece;
        // Sub-steps only arise for very coarse x-grids; the inflow value is
        // interpolated linearly in the sub-step index.
        let w = (s + 1) as f64 / subs as f64;
        next[0] = phi[0] + w * (inflow - phi[0]);
        cur = next;
    }
    cur
}
