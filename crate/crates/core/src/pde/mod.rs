//! Independent check of the adjustment decomposition on a single lognormal
//! asset.
//!
//! The adjusted value solves a linear PDE whose sources are the close-out,
//! funding, collateral, capital and tax terms evaluated on the risk-free value.
//! [`solve_vhat`] marches that PDE with Crank-Nicolson; by linearity each
//! component can be solved separately. [`quadrature_oracle`] evaluates the same
//! components from their Feynman-Kac representation, and
//! [`verify_decomposition`] compares the two.

mod oracle;
mod problem;
mod replication;
mod solver;
mod verify;

pub use oracle::{quadrature_oracle, Decomposition};
pub use problem::{Component, ComponentSources, IssuerHedgeError, Payoff, PdeProblem};
pub use replication::{replication_states, ReplicationState};
pub use solver::{grid_diagnostics, solve_component, solve_vhat, Grid, PdeSolution};
pub use verify::{verify_decomposition, ComponentCheck, VerificationReport};
