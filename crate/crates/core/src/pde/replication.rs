use serde::Serialize;

use super::problem::PdeProblem;
use super::solver::PdeSolution;
use crate::credit::{closeout_values, counterparty_hedge_error, tax_jump};
use crate::error::{Error, Result};

/// Hedge positions implied by the adjusted value at one grid node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReplicationState {
    pub time: f64,
    pub spot: f64,
    pub adjusted_value: f64,
    pub risk_free_value: f64,
    /// Units of the asset held, `-dV_hat/dS`.
    pub asset_units: f64,
    pub collateral: f64,
    pub net_capital: f64,
    /// Units and prices of the two issuer bonds (zero recovery, then recovery `R_B`).
    pub issuer_bond_units: [f64; 2],
    pub issuer_bond_prices: [f64; 2],
    /// Value of the counterparty bond position, `psi (g_C - V_hat)`.
    pub counterparty_bond_value: f64,
    pub counterparty_hedge_error: f64,
    /// `V_hat - X + sum alpha_i P_i - phi K`; zero when the funding condition holds.
    pub funding_residual: f64,
}

/// Replication strategy on every interior node of one stored time level.
pub fn replication_states(problem: &PdeProblem, solution: &PdeSolution, level: usize) -> Result<Vec<ReplicationState>> {
    if level >= solution.times.len() {
        return Err(Error::validation(format!("time level {level} out of range")));
    }
    let t = solution.times[level];
    let tau = (problem.maturity - t).max(0.0);
    let lb = problem.issuer_hazard;
    let recoveries = [0.0, problem.issuer_recovery];
    let prices = recoveries.map(|r| (-(problem.rate + (1.0 - r) * lb) * tau).exp());
    let s = &solution.spots;
    let v_hat = &solution.adjusted[level];
    let v = &solution.risk_free[level];
    let mut out = Vec::with_capacity(s.len().saturating_sub(2));
    for j in 1..s.len() - 1 {
        let (h0, h1) = (s[j] - s[j - 1], s[j + 1] - s[j]);
        // three-point derivative on a non-uniform mesh
        let dv = -h1 / (h0 * (h0 + h1)) * v_hat[j - 1] + (h1 - h0) / (h0 * h1) * v_hat[j]
            + h0 / (h1 * (h0 + h1)) * v_hat[j + 1];
        let x = problem.collateral(v[j]);
        let k_net = problem.net_capital(v[j]);
        let phi_k = problem.capital_funding * k_net;
        let g = closeout_values(&problem.closeout_state(v[j]));
        let eps = problem.issuer_hedge_error(v[j]);
        let portfolio = -(v_hat[j] - x - phi_k);
        let on_default = eps.base + eps.capital - g.g_b + x + phi_k;
        // with zero issuer recovery the two bonds coincide and only one is held
        let spread = recoveries[1] - recoveries[0];
        let second = if spread > 0.0 { (on_default - recoveries[0] * portfolio) / spread } else { 0.0 };
        let first = portfolio - second;
        let units = [first / prices[0], second / prices[1]];
        let jump = tax_jump(v[j], x, problem.counterparty_recovery, problem.tax_rate);
        let funding_residual = v_hat[j] - x + units[0] * prices[0] + units[1] * prices[1] - phi_k;
        out.push(ReplicationState {
            time: t,
            spot: s[j],
            adjusted_value: v_hat[j],
            risk_free_value: v[j],
            asset_units: -dv,
            collateral: x,
            net_capital: k_net,
            issuer_bond_units: units,
            issuer_bond_prices: prices,
            counterparty_bond_value: problem.hedge_fraction * (g.g_c - v_hat[j]),
            counterparty_hedge_error: counterparty_hedge_error(g.g_c, v_hat[j], problem.hedge_fraction, jump),
            funding_residual,
        });
    }
    Ok(out)
}
