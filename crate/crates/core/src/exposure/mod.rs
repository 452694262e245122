//! Short-rate simulation and swap exposure profiles.
//!
//! Rates follow a one-factor Gaussian model fitted to the initial curve, so
//! zero-coupon bonds are analytic and swaps are revalued on path in closed
//! form. Pathwise discount factors are simulated exactly alongside the factor,
//! which keeps `r(u)` discounting inside the exposure expectations.

mod curve;
mod market_data;
mod model;
mod profile;
mod simulate;
mod swap;

pub use curve::{build_discount_curve, DiscountCurve};
pub use market_data::{MarketData, MARKET_SCHEMA_VERSION};
pub use model::{BondCoefficients, ShortRateModel};
pub use profile::{collateral_profile, exposure_grid, exposure_profile, netting_set_profile, ExposureProfile};
pub use simulate::{simulate_paths, McSettings, PathSet, BLOCK_PATHS};
pub use swap::{value_swap, RateState, SwapSide, SwapSnapshot, SwapSpec};
