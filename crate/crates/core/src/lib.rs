//! Valuation adjustments for derivative portfolios whose counterparty default
//! risk is only partially hedged.
//!
//! The crate is organised bottom-up:
//!
//! * [`credit`] holds the scalar credit and tax relations (effective hazard,
//!   close-out values, hedge errors, compensator, tax jump, taxable flow).
//! * [`exposure`] simulates a curve-fitted Gaussian short rate and produces
//!   discounted exposure profiles for interest-rate swaps.
//! * [`regcap`] turns exposure profiles into regulatory capital profiles
//!   (standardised market risk, CEM counterparty credit risk, CVA VAR).
//! * [`xva`] integrates profiles into the CVA / DVA / FCA / COLVA / KVA / TVA
//!   breakdown.
//! * [`pde`] is an independent verifier: a Crank-Nicolson solver for the full
//!   valuation PDE on a lognormal asset, checked against a Feynman-Kac
//!   quadrature of the same adjustments.

// `!(x >= 0.0)` style checks are there to reject NaN along with negatives.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod credit;
pub mod error;
pub mod exposure;
pub mod pde;
pub mod quadrature;
pub mod regcap;
pub mod xva;

pub use error::{Error, Result};
