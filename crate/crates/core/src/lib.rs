//! Simulation, statistics and replication pricing for Hermite fractional markets.
//!
//! The crate is organized bottom-up:
//!
//! * [`kernel`]: the Hermite kernel, its L2 norm and normalizing constants;
//! * [`simulate`]: fractional Gaussian noise, Hermite-motion paths, the
//!   subordinated process and pathwise (Stratonovich) integration;
//! * [`stats`]: quadratic variation, Hurst estimation, long-range dependence;
//! * [`market`]: Hermite rates, riskless and risky assets, market price of risk;
//! * [`pricing`]: perpetual derivatives, bonds, forwards and futures;
//! * [`config`] and [`io`]: sectioned configuration files and CSV/JSON output.

// Range checks are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod io;
pub mod kernel;
pub mod market;
pub mod par;
pub mod pricing;
pub mod quad;
pub mod rng;
pub mod simulate;
pub mod stats;

pub use error::{HermiteError, Result};
pub use kernel::{HermiteSpec, KernelConstants};
pub use market::MarketSpec;
pub use simulate::SamplePath;
