//! Replication pricing: perpetual derivatives, bonds, forwards and futures.

mod bond;
mod fd;
mod futures;
mod perpetual;

pub use bond::{
    bond_price, forward_price, forward_value, forward_value_portfolio, term_structure, CurvePoint, TermStructure,
};
pub use fd::{price_fd, FdField, PricingGrid};
pub use futures::{futures_march, futures_residual, FuturesField, FuturesGrid};
pub use perpetual::{
    perpetual_pde_residual, power_derivative_beta, price_characteristics, Payoff, PowerBeta, PowerField, PriceField,
    PricePoint, RisklessField,
};
