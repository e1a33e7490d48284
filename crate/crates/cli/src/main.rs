//! `hermite`: command-line front end for hermite-core.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hermite_core::config::RunConfig;
use hermite_core::{io, HermiteError};

use output::Output;

#[derive(Debug, Parser)]
#[command(
    name = "hermite",
    version,
    about = "Hermite-motion simulation, statistics and pricing"
)]
struct Cli {
    /// Output directory [default: `[output] dir`, else ./hermite-out].
    #[arg(long, global = true, env = "HERMITE_OUT_DIR")]
    out: Option<PathBuf>,
    /// Sectioned key = value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Root seed; overrides `[run] seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct ProcessArgs {
    /// Hurst index in (1/2, 1).
    #[arg(long)]
    pub hurst: Option<f64>,
    /// Hermite order (1 gives fractional Brownian motion).
    #[arg(long)]
    pub order: Option<u32>,
}

#[derive(Debug, Clone, Args)]
pub struct MarketArgs {
    #[command(flatten)]
    pub process: ProcessArgs,
    /// Constant riskless basic rate (single-asset market without --config).
    #[arg(long)]
    pub rate: Option<f64>,
    /// Constant drift basic rate.
    #[arg(long, default_value_t = 0.0)]
    pub drift: f64,
    /// Constant dividend basic rate.
    #[arg(long, default_value_t = 0.0)]
    pub dividend: f64,
    /// Volatility.
    #[arg(long, default_value_t = 0.2)]
    pub sigma: f64,
    /// Initial price.
    #[arg(long, default_value_t = 1.0)]
    pub s0: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Method {
    Invariance,
    Exact,
    Subordinated,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate Hermite-motion paths.
    Simulate {
        #[command(flatten)]
        process: ProcessArgs,
        /// Grid steps per unit time.
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long)]
        paths: Option<usize>,
        #[arg(long, value_enum, default_value = "invariance")]
        method: Method,
    },
    /// Normalizing constants and kernel norms.
    Kernel {
        #[command(flatten)]
        process: ProcessArgs,
        /// Time at which the squared kernel norm is evaluated.
        #[arg(long = "t", default_value_t = 1.0)]
        t: f64,
        /// Comma-separated point at which to evaluate the kernel.
        #[arg(long, value_delimiter = ',')]
        point: Option<Vec<f64>>,
    },
    /// Estimate the Hurst index of a path.
    Estimate {
        /// CSV with header `t,value`; without it an exact fBm path is simulated.
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        process: ProcessArgs,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        horizon: Option<f64>,
    },
    /// Scaling of the quadratic-variation normalizer.
    Qv {
        #[command(flatten)]
        process: ProcessArgs,
        /// Block counts N.
        #[arg(long, value_delimiter = ',', default_value = "32,64,128,256")]
        n_list: Vec<usize>,
        /// Block length.
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        /// Monte Carlo paths per block count.
        #[arg(long)]
        paths: Option<usize>,
    },
    /// Replication prices.
    Price {
        #[command(subcommand)]
        what: PriceCommand,
    },
    /// Bond term structure.
    Curve {
        #[command(flatten)]
        market: MarketArgs,
        /// Anchor (valuation) times.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        anchors: Vec<f64>,
        /// Explicit maturities; otherwise `points` maturities up to `max_maturity`.
        #[arg(long, value_delimiter = ',')]
        maturities: Option<Vec<f64>>,
        #[arg(long, default_value_t = 10.0)]
        max_maturity: f64,
        #[arg(long, default_value_t = 40)]
        points: usize,
    },
}

#[derive(Debug, Subcommand)]
enum PriceCommand {
    /// Zero-coupon bond.
    Bond {
        #[command(flatten)]
        market: MarketArgs,
        #[arg(long = "t", default_value_t = 0.0)]
        t: f64,
        #[arg(long = "T", default_value_t = 1.0)]
        maturity: f64,
    },
    /// Power payoff `Π x_j^α_j` at maturity, by characteristics and finite differences.
    Perpetual {
        #[command(flatten)]
        market: MarketArgs,
        /// Exponents, one per asset (default 1 each).
        #[arg(long, value_delimiter = ',')]
        alpha: Option<Vec<f64>>,
        #[arg(long = "t", default_value_t = 0.0)]
        t: f64,
        #[arg(long = "T", default_value_t = 1.0)]
        maturity: f64,
        #[arg(long, default_value_t = 256)]
        nx: usize,
        #[arg(long, default_value_t = 256)]
        nt: usize,
    },
    /// Forward contract on one asset along a simulated path.
    Forward {
        #[command(flatten)]
        market: MarketArgs,
        #[arg(long = "t", default_value_t = 0.0)]
        t: f64,
        #[arg(long = "T", default_value_t = 1.0)]
        maturity: f64,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, default_value_t = 0)]
        asset: usize,
    },
    /// Futures equation marched along a simulated path.
    Futures {
        #[command(flatten)]
        market: MarketArgs,
        #[arg(long, default_value_t = 128)]
        nx: usize,
        #[arg(long, default_value_t = 128)]
        nt: usize,
        #[arg(long)]
        horizon: Option<f64>,
        /// Initial profile `level + slope * x`.
        #[arg(long, default_value_t = 1.0)]
        psi0_level: f64,
        #[arg(long, default_value_t = 0.3)]
        psi0_slope: f64,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate { .. } => "simulate",
            Command::Kernel { .. } => "kernel",
            Command::Estimate { .. } => "estimate",
            Command::Qv { .. } => "qv",
            Command::Curve { .. } => "curve",
            Command::Price { what } => match what {
                PriceCommand::Bond { .. } => "price bond",
                PriceCommand::Perpetual { .. } => "price perpetual",
                PriceCommand::Forward { .. } => "price forward",
                PriceCommand::Futures { .. } => "price futures",
            },
        }
    }
}

fn run(cli: Cli) -> hermite_core::Result<Vec<PathBuf>> {
    let config = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| HermiteError::InvalidInput(format!("cannot read config {}: {e}", path.display())))?;
            Some(RunConfig::parse(&text).map_err(|e| match e {
                HermiteError::Config { line, message } => HermiteError::Config {
                    line,
                    message: format!("{}: {message}", path.display()),
                },
                other => other,
            })?)
        }
        None => None,
    };
    let seed = cli
        .seed
        .or_else(|| config.as_ref().and_then(|c| c.run.seed))
        .unwrap_or(0);
    let config_digest = config.as_ref().map(RunConfig::digest).unwrap_or_default();
    let digest = io::digest(format!("{config_digest}\n{:?}\n{seed}", cli.command).as_bytes());
    let out_dir = cli
        .out
        .clone()
        .or_else(|| config.as_ref().and_then(|c| c.output.dir.as_ref().map(PathBuf::from)))
        .unwrap_or_else(|| PathBuf::from("hermite-out"));
    let mut out = Output::new(&out_dir, cli.command.name(), digest, seed);
    let ctx = commands::Ctx {
        config: config.as_ref(),
        seed,
    };
    match cli.command {
        Command::Simulate {
            process,
            steps,
            horizon,
            paths,
            method,
        } => commands::simulate(&ctx, &mut out, &process, steps, horizon, paths, method)?,
        Command::Kernel { process, t, point } => commands::kernel(&ctx, &mut out, &process, t, point.as_deref())?,
        Command::Estimate {
            input,
            process,
            steps,
            horizon,
        } => commands::estimate(&ctx, &mut out, input.as_deref(), &process, steps, horizon)?,
        Command::Qv {
            process,
            n_list,
            gamma,
            paths,
        } => commands::qv(&ctx, &mut out, &process, &n_list, gamma, paths)?,
        Command::Curve {
            market,
            anchors,
            maturities,
            max_maturity,
            points,
        } => commands::curve(&ctx, &mut out, &market, &anchors, maturities, max_maturity, points)?,
        Command::Price { what } => match what {
            PriceCommand::Bond { market, t, maturity } => commands::bond(&ctx, &mut out, &market, t, maturity)?,
            PriceCommand::Perpetual {
                market,
                alpha,
                t,
                maturity,
                nx,
                nt,
            } => commands::perpetual(&ctx, &mut out, &market, alpha, t, maturity, nx, nt)?,
            PriceCommand::Forward {
                market,
                t,
                maturity,
                steps,
                asset,
            } => commands::forward(&ctx, &mut out, &market, t, maturity, steps, asset)?,
            PriceCommand::Futures {
                market,
                nx,
                nt,
                horizon,
                psi0_level,
                psi0_slope,
            } => commands::futures(&ctx, &mut out, &market, nx, nt, horizon, psi0_level, psi0_slope)?,
        },
    }
    Ok(out.written)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let name = cli.command.name();
    match run(cli) {
        Ok(files) => {
            for f in &files {
                println!("{}", f.display());
            }
            eprintln!(
                "{name}: {} file(s) in {:.3}s",
                files.len(),
                started.elapsed().as_secs_f64()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
