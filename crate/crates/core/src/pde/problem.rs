use serde::{Deserialize, Serialize};

use crate::credit::{
    closeout_values, compensator_rate, effective_hazard, tax_jump, taxable_flow, CloseOutState,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Payoff {
    Call { strike: f64 },
    Put { strike: f64 },
    Forward { strike: f64 },
}

impl Payoff {
    pub fn strike(&self) -> f64 {
        match *self {
            Payoff::Call { strike } | Payoff::Put { strike } | Payoff::Forward { strike } => strike,
        }
    }

    pub fn value(&self, s: f64) -> f64 {
        match *self {
            Payoff::Call { strike } => (s - strike).max(0.0),
            Payoff::Put { strike } => (strike - s).max(0.0),
            Payoff::Forward { strike } => s - strike,
        }
    }
}

/// Single-asset problem for the full valuation PDE with partial counterparty
/// hedging, capital and tax. All rates are flat.
///
/// The asset follows `dS = (q_S - gamma_S) S dt + sigma S dW` under the pricing
/// measure (repo rate `q_S`, dividend yield `gamma_S`). Collateral is a fixed
/// fraction of the risk-free value, `X = c V`, and capital is proportional to
/// positive exposure: `K^U = kappa_U V^+`, `K^R = kappa_R V^+`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PdeProblem {
    pub spot: f64,
    pub volatility: f64,
    #[serde(default)]
    pub repo_rate: f64,
    #[serde(default)]
    pub dividend_yield: f64,
    pub rate: f64,
    pub issuer_hazard: f64,
    pub issuer_recovery: f64,
    pub counterparty_hazard: f64,
    pub counterparty_recovery: f64,
    pub hedge_fraction: f64,
    #[serde(default)]
    pub price_of_risk: f64,
    #[serde(default)]
    pub capital_funding: f64,
    #[serde(default)]
    pub tax_rate: f64,
    #[serde(default)]
    pub tax_own_default_accruals: bool,
    #[serde(default)]
    pub tax_compensator: bool,
    #[serde(default)]
    pub cost_of_capital: f64,
    #[serde(default)]
    pub collateral_spread: f64,
    #[serde(default)]
    pub collateral_fraction: f64,
    #[serde(default)]
    pub capital_unhedged: f64,
    #[serde(default)]
    pub capital_relief: f64,
    pub payoff: Payoff,
    pub maturity: f64,
}

/// Source terms of the adjustment PDE at one value of `V`, split by
/// component. Each adjustment is `-int e^{-k u} E[source(V(u))] du` with
/// `k = r + lambda_B + effective lambda_C`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComponentSources {
    pub cva: f64,
    pub dva: f64,
    pub fca: f64,
    pub colva: f64,
    pub kva: f64,
    pub tva: f64,
}

impl ComponentSources {
    pub fn total(&self) -> f64 {
        self.cva + self.dva + self.fca + self.colva + self.kva + self.tva
    }

    pub fn get(&self, c: Component) -> f64 {
        match c {
            Component::Cva => self.cva,
            Component::Dva => self.dva,
            Component::Fca => self.fca,
            Component::Colva => self.colva,
            Component::Kva => self.kva,
            Component::Tva => self.tva,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    Cva,
    Dva,
    Fca,
    Colva,
    Kva,
    Tva,
}

impl Component {
    pub const ALL: [Component; 6] =
        [Component::Cva, Component::Dva, Component::Fca, Component::Colva, Component::Kva, Component::Tva];

    pub fn label(self) -> &'static str {
        match self {
            Component::Cva => "CVA",
            Component::Dva => "DVA",
            Component::Fca => "FCA",
            Component::Colva => "COLVA",
            Component::Kva => "KVA",
            Component::Tva => "TVA",
        }
    }
}

/// Own-default hedge error split into its capital-free and capital parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IssuerHedgeError {
    pub base: f64,
    pub capital: f64,
}

impl PdeProblem {
    /// At-the-money forward with every adjustment switched on.
    pub fn example() -> Self {
        Self {
            spot: 100.0,
            volatility: 0.25,
            repo_rate: 0.03,
            dividend_yield: 0.01,
            rate: 0.03,
            issuer_hazard: 0.02,
            issuer_recovery: 0.4,
            counterparty_hazard: 0.04,
            counterparty_recovery: 0.4,
            hedge_fraction: 0.5,
            price_of_risk: -0.5,
            capital_funding: 1.0,
            tax_rate: 0.21,
            tax_own_default_accruals: false,
            tax_compensator: false,
            cost_of_capital: 0.10,
            collateral_spread: 0.002,
            collateral_fraction: 0.3,
            capital_unhedged: 0.08,
            capital_relief: 0.03,
            payoff: Payoff::Forward { strike: 100.0 },
            maturity: 5.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.spot,
            self.volatility,
            self.repo_rate,
            self.dividend_yield,
            self.rate,
            self.issuer_hazard,
            self.counterparty_hazard,
            self.price_of_risk,
            self.cost_of_capital,
            self.collateral_spread,
            self.capital_unhedged,
            self.capital_relief,
            self.payoff.strike(),
            self.maturity,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("PDE problem parameters must be finite"));
        }
        if !(self.spot > 0.0) {
            return Err(Error::validation("spot must be positive"));
        }
        if !(self.volatility > 0.0) {
            return Err(Error::validation("asset volatility must be positive"));
        }
        if !(self.maturity > 0.0) {
            return Err(Error::validation("maturity must be positive"));
        }
        if self.issuer_hazard < 0.0 || self.counterparty_hazard < 0.0 {
            return Err(Error::validation("hazard rates must be non-negative"));
        }
        for (name, v) in [
            ("issuerRecovery", self.issuer_recovery),
            ("counterpartyRecovery", self.counterparty_recovery),
            ("hedgeFraction", self.hedge_fraction),
            ("capitalFunding", self.capital_funding),
            ("collateralFraction", self.collateral_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::validation(format!("{name} = {v} outside [0, 1]")));
            }
        }
        if !(self.price_of_risk <= 1.0) {
            return Err(Error::validation("priceOfRisk above 1 gives a negative physical hazard"));
        }
        if !(0.0..1.0).contains(&self.tax_rate) {
            return Err(Error::validation("taxRate outside [0, 1)"));
        }
        if self.capital_unhedged < 0.0 || self.capital_relief < 0.0 || self.capital_relief > self.capital_unhedged {
            return Err(Error::validation("capital ratios need 0 <= capitalRelief <= capitalUnhedged"));
        }
        Ok(())
    }

    /// Drift of the asset under the pricing measure.
    pub fn drift(&self) -> f64 {
        self.repo_rate - self.dividend_yield
    }

    pub fn effective_hazard(&self) -> f64 {
        effective_hazard(self.counterparty_hazard, self.hedge_fraction, self.price_of_risk)
            .expect("validated problem")
    }

    pub fn physical_hazard(&self) -> f64 {
        self.counterparty_hazard * (1.0 - self.price_of_risk)
    }

    /// Discount rate of the adjustment PDE.
    pub fn adjusted_rate(&self) -> f64 {
        self.rate + self.issuer_hazard + self.effective_hazard()
    }

    pub fn collateral(&self, v: f64) -> f64 {
        self.collateral_fraction * v
    }

    /// `(K^U, K^R)` at risk-free value `v`.
    pub fn capital(&self, v: f64) -> (f64, f64) {
        let e = v.max(0.0);
        (self.capital_unhedged * e, self.capital_relief * e)
    }

    pub fn net_capital(&self, v: f64) -> f64 {
        let (ku, kr) = self.capital(v);
        ku - self.hedge_fraction * kr
    }

    /// Hedge error on own default for the no-shortfall own-bond strategy:
    /// the windfall `(1 - R_B)(V - X)^+` is not monetised and the capital
    /// part vanishes.
    pub fn issuer_hedge_error(&self, v: f64) -> IssuerHedgeError {
        let x = self.collateral(v);
        IssuerHedgeError { base: (1.0 - self.issuer_recovery) * (v - x).max(0.0), capital: 0.0 }
    }

    pub fn closeout_state(&self, v: f64) -> CloseOutState {
        CloseOutState {
            value: v,
            collateral: self.collateral(v),
            issuer_recovery: self.issuer_recovery,
            counterparty_recovery: self.counterparty_recovery,
        }
    }

    /// Per-component sources at risk-free value `v`.
    pub fn sources(&self, v: f64) -> ComponentSources {
        let x = self.collateral(v);
        let g = closeout_values(&self.closeout_state(v));
        let lb = self.issuer_hazard;
        let eps = self.issuer_hedge_error(v);
        let (ku, kr) = self.capital(v);
        let k_net = ku - self.hedge_fraction * kr;
        let jump = tax_jump(v, x, self.counterparty_recovery, self.tax_rate);
        let mut taxable = taxable_flow(
            self.cost_of_capital,
            ku,
            kr,
            self.hedge_fraction,
            lb,
            eps.base,
            eps.capital,
            self.tax_own_default_accruals,
        );
        if self.tax_compensator {
            taxable += compensator_rate(g.g_c, v, self.hedge_fraction, self.price_of_risk, self.counterparty_hazard, jump);
        }
        ComponentSources {
            cva: self.effective_hazard() * (v - g.g_c),
            dva: lb * (v - g.g_b),
            fca: lb * eps.base,
            colva: self.collateral_spread * x,
            kva: (self.cost_of_capital - self.rate * self.capital_funding) * k_net + lb * eps.capital,
            tva: self.tax_rate * taxable + self.physical_hazard() * (1.0 - self.hedge_fraction) * jump,
        }
    }

    /// Risk-free value at time `t` (Black-Scholes with carry).
    pub fn risk_free_value(&self, t: f64, s: f64) -> f64 {
        let tau = (self.maturity - t).max(0.0);
        let r = self.rate;
        let b = self.drift();
        let k = self.payoff.strike();
        let fwd_s = s * ((b - r) * tau).exp();
        let df = (-r * tau).exp();
        match self.payoff {
            Payoff::Forward { .. } => fwd_s - k * df,
            Payoff::Call { .. } | Payoff::Put { .. } if tau == 0.0 => self.payoff.value(s),
            Payoff::Call { .. } => {
                let (d1, d2) = d1d2(s, k, b, self.volatility, tau);
                fwd_s * norm_cdf(d1) - k * df * norm_cdf(d2)
            }
            Payoff::Put { .. } => {
                let (d1, d2) = d1d2(s, k, b, self.volatility, tau);
                k * df * norm_cdf(-d2) - fwd_s * norm_cdf(-d1)
            }
        }
    }
}

fn d1d2(s: f64, k: f64, b: f64, sigma: f64, tau: f64) -> (f64, f64) {
    let sd = sigma * tau.sqrt();
    let d1 = ((s / k).ln() + (b + 0.5 * sigma * sigma) * tau) / sd;
    (d1, d1 - sd)
}

pub(crate) fn norm_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}
