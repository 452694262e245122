//! Scalar credit and tax relations for partially hedged counterparty risk.
//!
//! Sign convention: a cash amount is positive when received by the issuer
//! (the bank), so `V > 0` means the counterparty owes the bank.
//!
//! The counterparty hedge is a fraction `psi` of the full hedge. The physical
//! counterparty hazard is `lambda_C * (1 - xi)`, where `xi` is the
//! proportional market price of default risk; the absolute market price is
//! `m = xi * lambda_C` and is never stored.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[inline]
pub(crate) fn pos(x: f64) -> f64 {
    x.max(0.0)
}

#[inline]
pub(crate) fn neg(x: f64) -> f64 {
    x.min(0.0)
}

/// Piecewise-constant hazard curve with a recovery rate.
///
/// `hazards[i]` applies on `(pillars[i-1], pillars[i]]` (with `pillars[-1] = 0`)
/// and the last hazard is extrapolated flat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreditCurve {
    pillars: Vec<f64>,
    hazards: Vec<f64>,
    recovery: f64,
}

impl CreditCurve {
    pub fn new(pillars: Vec<f64>, hazards: Vec<f64>, recovery: f64) -> Result<Self> {
        if pillars.is_empty() || pillars.len() != hazards.len() {
            return Err(Error::validation(
                "credit curve needs one hazard rate per pillar and at least one pillar",
            ));
        }
        if !(pillars[0] > 0.0) || pillars.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::validation(
                "credit curve pillars must be positive and strictly increasing",
            ));
        }
        if pillars.iter().any(|t| !t.is_finite()) {
            return Err(Error::validation("credit curve pillars must be finite"));
        }
        if hazards.iter().any(|h| !(*h >= 0.0) || !h.is_finite()) {
            return Err(Error::validation("hazard rates must be finite and non-negative"));
        }
        if !(0.0..=1.0).contains(&recovery) {
            return Err(Error::validation(format!("recovery {recovery} outside [0, 1]")));
        }
        Ok(Self { pillars, hazards, recovery })
    }

    /// A single hazard rate for all maturities.
    pub fn flat(hazard: f64, recovery: f64) -> Result<Self> {
        Self::new(vec![1.0], vec![hazard], recovery)
    }

    /// Flat curve bootstrapped from a CDS spread via `spread = (1 - R) * lambda`.
    pub fn from_spread(spread: f64, recovery: f64) -> Result<Self> {
        Self::flat(hazard_from_spread(spread, recovery)?, recovery)
    }

    pub fn recovery(&self) -> f64 {
        self.recovery
    }

    pub fn pillars(&self) -> &[f64] {
        &self.pillars
    }

    pub fn hazards(&self) -> &[f64] {
        &self.hazards
    }

    /// Instantaneous hazard at `t` (right-continuous at pillars).
    pub fn hazard_at(&self, t: f64) -> f64 {
        let idx = self.pillars.partition_point(|&p| p <= t);
        self.hazards[idx.min(self.hazards.len() - 1)]
    }

    /// `int_0^t lambda(s) ds`.
    pub fn integrated_hazard(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        let mut prev = 0.0;
        for (&p, &h) in self.pillars.iter().zip(&self.hazards) {
            if t <= p {
                return acc + h * (t - prev);
            }
            acc += h * (p - prev);
            prev = p;
        }
        acc + self.hazards[self.hazards.len() - 1] * (t - prev)
    }

    pub fn survival(&self, t: f64) -> f64 {
        (-self.integrated_hazard(t)).exp()
    }
}

/// Counterparty hedge and funding dials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HedgePolicy {
    /// Fraction of the full counterparty hedge actually held (`psi`).
    pub hedge_fraction: f64,
    /// Proportional market price of counterparty default risk (`xi`).
    pub price_of_risk: f64,
    /// Fraction of capital usable for funding (`phi`).
    pub capital_funding: f64,
}

impl HedgePolicy {
    pub fn new(hedge_fraction: f64, price_of_risk: f64, capital_funding: f64) -> Result<Self> {
        check_unit("hedge fraction psi", hedge_fraction)?;
        check_unit("capital funding fraction phi", capital_funding)?;
        if !(price_of_risk <= 1.0) || !price_of_risk.is_finite() {
            return Err(Error::domain(format!(
                "price of risk xi = {price_of_risk} gives a negative physical hazard"
            )));
        }
        Ok(Self { hedge_fraction, price_of_risk, capital_funding })
    }

    pub fn full_hedge() -> Self {
        Self { hedge_fraction: 1.0, price_of_risk: 0.0, capital_funding: 0.0 }
    }

    /// Absolute market price of default risk `m = xi * lambda_C`.
    pub fn market_price_of_risk(&self, lambda_c: f64) -> f64 {
        self.price_of_risk * lambda_c
    }

    pub fn effective_hazard(&self, lambda_c: f64) -> Result<f64> {
        effective_hazard(lambda_c, self.hedge_fraction, self.price_of_risk)
    }

    pub fn physical_hazard(&self, lambda_c: f64) -> f64 {
        lambda_c * (1.0 - self.price_of_risk)
    }
}

/// Tax dials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaxPolicy {
    /// Effective tax rate `gamma_E`.
    pub rate: f64,
    /// Indicator `I_B`: whether accruals relative to own default are taxed.
    pub tax_own_default_accruals: bool,
    /// Add the compensator income to the taxable flow (off by default).
    pub tax_compensator: bool,
}

impl TaxPolicy {
    pub fn new(rate: f64, tax_own_default_accruals: bool) -> Result<Self> {
        if !(0.0..1.0).contains(&rate) {
            return Err(Error::domain(format!("tax rate {rate} outside [0, 1)")));
        }
        Ok(Self { rate, tax_own_default_accruals, tax_compensator: false })
    }

    pub fn none() -> Self {
        Self { rate: 0.0, tax_own_default_accruals: false, tax_compensator: false }
    }

    pub fn own_default_indicator(&self) -> f64 {
        if self.tax_own_default_accruals {
            1.0
        } else {
            0.0
        }
    }
}

/// Inputs to the close-out functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloseOutState {
    /// Risk-free value `V`.
    pub value: f64,
    /// Collateral `X`.
    pub collateral: f64,
    pub issuer_recovery: f64,
    pub counterparty_recovery: f64,
}

/// Portfolio values after issuer default (`g_b`) and counterparty default (`g_c`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloseOut {
    pub g_b: f64,
    pub g_c: f64,
}

fn check_unit(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} = {x} outside [0, 1]")))
    }
}

/// Hazard rate implied by a spread over the risk-free rate: `spread / (1 - R)`.
pub fn hazard_from_spread(spread: f64, recovery: f64) -> Result<f64> {
    if !(recovery < 1.0) || recovery < 0.0 {
        return Err(Error::domain(format!(
            "recovery {recovery} leaves no loss given default"
        )));
    }
    if !(spread >= 0.0) || !spread.is_finite() {
        return Err(Error::domain(format!("spread {spread} must be finite and non-negative")));
    }
    Ok(spread / (1.0 - recovery))
}

/// Blend of risk-neutral and physical hazard: `psi * l + (1 - psi) * (1 - xi) * l`.
///
/// The two limits are exact: `psi = 1` returns `l` and `psi = 0` returns
/// `l * (1 - xi)` bit for bit.
pub fn effective_hazard(lambda_c: f64, psi: f64, xi: f64) -> Result<f64> {
    check_unit("hedge fraction psi", psi)?;
    if !(lambda_c >= 0.0) {
        return Err(Error::domain(format!("hazard rate {lambda_c} is negative")));
    }
    let physical = (1.0 - xi) * lambda_c;
    if !(physical >= 0.0) {
        return Err(Error::domain(format!(
            "physical hazard {physical} is negative (xi = {xi})"
        )));
    }
    Ok(psi * lambda_c + (1.0 - psi) * physical)
}

pub fn closeout_values(state: &CloseOutState) -> CloseOut {
    let exposure = state.value - state.collateral;
    CloseOut {
        g_b: pos(exposure) + state.issuer_recovery * neg(exposure) + state.collateral,
        g_c: state.counterparty_recovery * pos(exposure) + neg(exposure) + state.collateral,
    }
}

/// Unhedged jump on counterparty default, `(1 - psi)(g_C - V_hat + tax_jump)`.
pub fn counterparty_hedge_error(g_c: f64, v_hat: f64, psi: f64, tax_jump: f64) -> f64 {
    (1.0 - psi) * (g_c - v_hat + tax_jump)
}

/// Accrual rate that makes the warehoused jump zero-mean under the physical measure.
pub fn compensator_rate(g_c: f64, v_hat: f64, psi: f64, xi: f64, lambda_c: f64, tax_jump: f64) -> f64 {
    -counterparty_hedge_error(g_c, v_hat, psi, tax_jump) * lambda_c * (1.0 - xi)
}

/// Tax effect of the value jump on full counterparty default, `-gamma_E (V - g_C(V, X))`.
pub fn tax_jump(value: f64, collateral: f64, counterparty_recovery: f64, tax_rate: f64) -> f64 {
    let exposure = value - collateral;
    let g_c = counterparty_recovery * pos(exposure) + neg(exposure) + collateral;
    -tax_rate * (value - g_c)
}

/// Taxable flow rate `E`.
///
/// `gamma_K (K_U - psi K_R) + I_B lambda_B (eps_BK + eps_B0)`. Capital income
/// does not appear: the source of the profit is irrelevant to the tax base.
#[allow(clippy::too_many_arguments)]
pub fn taxable_flow(
    cost_of_capital: f64,
    unhedged_capital: f64,
    capital_relief: f64,
    psi: f64,
    lambda_b: f64,
    eps_b0: f64,
    eps_bk: f64,
    tax_own_default_accruals: bool,
) -> f64 {
    let capital = cost_of_capital * (unhedged_capital - psi * capital_relief);
    if tax_own_default_accruals {
        capital + lambda_b * (eps_bk + eps_b0)
    } else {
        capital
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn hazard_from_spread_examples() {
        assert_eq!(hazard_from_spread(0.0, 0.4).unwrap(), 0.0);
        assert!(close(hazard_from_spread(0.01, 0.4).unwrap(), 0.016_666_666_666_666_67, 1e-15));
        assert!(close(hazard_from_spread(0.025, 0.4).unwrap(), 0.041_666_666_666_666_67, 1e-15));
        assert!(matches!(hazard_from_spread(0.01, 1.0), Err(Error::Domain(_))));
        assert!(matches!(hazard_from_spread(-0.01, 0.4), Err(Error::Domain(_))));
    }

    #[test]
    fn effective_hazard_examples() {
        assert_eq!(effective_hazard(0.02, 1.0, 0.5).unwrap(), 0.02);
        assert_eq!(effective_hazard(0.02, 0.0, 0.5).unwrap(), 0.01);
        assert!(close(effective_hazard(0.04, 0.5, 0.5).unwrap(), 0.03, 1e-17));
        assert!(effective_hazard(0.02, 1.2, 0.0).is_err());
        assert!(effective_hazard(0.02, -0.1, 0.0).is_err());
        assert!(effective_hazard(0.02, 0.5, 1.5).is_err());
    }

    #[test]
    fn closeout_examples() {
        let s = |v, x| CloseOutState { value: v, collateral: x, issuer_recovery: 0.4, counterparty_recovery: 0.4 };
        assert!(close(closeout_values(&s(10.0, 0.0)).g_c, 4.0, 1e-15));
        let c = closeout_values(&s(-10.0, 0.0));
        assert!(close(c.g_b, -4.0, 1e-15));
        assert_eq!(c.g_c, -10.0);
        let c = closeout_values(&s(7.0, 7.0));
        assert_eq!((c.g_b, c.g_c), (7.0, 7.0));
    }

    #[test]
    fn hedge_error_and_compensator_examples() {
        assert_eq!(counterparty_hedge_error(4.0, 10.0, 1.0, 1.26), 0.0);
        assert_eq!(counterparty_hedge_error(4.0, 10.0, 0.0, 0.0), -6.0);
        assert!(close(counterparty_hedge_error(4.0, 10.0, 0.25, 1.26), -3.555, 1e-12));

        assert_eq!(compensator_rate(4.0, 10.0, 1.0, 0.5, 0.02, 0.0), 0.0);
        assert!(close(compensator_rate(4.0, 10.0, 0.0, 0.5, 0.02, 0.0), 0.06, 1e-15));
        assert_eq!(compensator_rate(4.0, 10.0, 0.0, 0.5, 0.0, 0.0), 0.0);
    }

    #[test]
    fn tax_jump_examples() {
        assert!(close(tax_jump(10.0, 0.0, 0.4, 0.21), -1.26, 1e-14));
        assert_eq!(tax_jump(10.0, 0.0, 0.4, 0.0), 0.0);
        assert_eq!(tax_jump(5.0, 5.0, 0.4, 0.21), 0.0);
    }

    #[test]
    fn taxable_flow_examples() {
        assert!(close(taxable_flow(0.10, 100.0, 40.0, 1.0, 0.0, 0.0, 0.0, false), 6.0, 1e-14));
        assert_eq!(taxable_flow(0.10, 0.0, 0.0, 1.0, 0.02, 5.0, 5.0, false), 0.0);
        // 0.1 * 100 + 0.0167 * (-30)
        assert!(close(taxable_flow(0.10, 100.0, 40.0, 0.0, 0.0167, -20.0, -10.0, true), 9.499, 1e-12));
    }

    #[test]
    fn credit_curve_piecewise() {
        let c = CreditCurve::new(vec![1.0, 3.0], vec![0.01, 0.03], 0.4).unwrap();
        assert!(close(c.integrated_hazard(0.5), 0.005, 1e-15));
        assert!(close(c.integrated_hazard(2.0), 0.01 + 0.03, 1e-15));
        assert!(close(c.integrated_hazard(5.0), 0.01 + 0.06 + 0.06, 1e-15));
        assert_eq!(c.hazard_at(1.0), 0.03);
        assert_eq!(c.hazard_at(10.0), 0.03);
        assert!(CreditCurve::new(vec![1.0, 1.0], vec![0.01, 0.02], 0.4).is_err());
        assert!(CreditCurve::new(vec![1.0], vec![-0.01], 0.4).is_err());
    }

    proptest! {
        #[test]
        fn effective_hazard_affine_and_monotone(l in 0.0..1.0f64, psi in 0.0..1.0f64, xi in -2.0..1.0f64, dxi in 0.0..0.5f64) {
            let lo = effective_hazard(l, 0.0, xi).unwrap();
            let hi = effective_hazard(l, 1.0, xi).unwrap();
            let mid = effective_hazard(l, psi, xi).unwrap();
            prop_assert!((mid - (psi * hi + (1.0 - psi) * lo)).abs() <= 1e-14);
            if xi + dxi <= 1.0 && psi < 1.0 {
                prop_assert!(effective_hazard(l, psi, xi + dxi).unwrap() <= mid + 1e-15);
            }
            prop_assert_eq!(hi, l);
        }

        #[test]
        fn closeout_identities(v in -1e6..1e6f64, x in -1e6..1e6f64, rb in 0.0..1.0f64, rc in 0.0..1.0f64) {
            let g = closeout_values(&CloseOutState { value: v, collateral: x, issuer_recovery: rb, counterparty_recovery: rc });
            let e = v - x;
            let rhs = v + x + rb * neg(e) + rc * pos(e);
            prop_assert!((g.g_b + g.g_c - rhs).abs() <= 1e-9 * (1.0 + v.abs() + x.abs()));
            if rb >= rc && v >= x {
                prop_assert!(g.g_b >= g.g_c);
            }
            let full = closeout_values(&CloseOutState { value: v, collateral: x, issuer_recovery: 1.0, counterparty_recovery: 1.0 });
            prop_assert!((full.g_c - v).abs() <= 1e-9 * (1.0 + v.abs() + x.abs()));
            prop_assert!((full.g_b - v).abs() <= 1e-9 * (1.0 + v.abs() + x.abs()));
        }

        #[test]
        fn full_hedge_kills_warehoused_terms(gc in -1e4..1e4f64, vh in -1e4..1e4f64, xi in -1.0..1.0f64, l in 0.0..1.0f64, d in -1e3..1e3f64) {
            prop_assert_eq!(counterparty_hedge_error(gc, vh, 1.0, d), 0.0);
            prop_assert_eq!(compensator_rate(gc, vh, 1.0, xi, l, d).abs(), 0.0);
        }

        #[test]
        fn compensator_nonnegative_on_loss(gc in -1e4..1e4f64, loss in 0.0..1e4f64, psi in 0.0..1.0f64, xi in -1.0..1.0f64, l in 0.0..1.0f64) {
            // g_C + tax_jump <= V_hat
            let vh = gc + loss;
            prop_assert!(compensator_rate(gc, vh, psi, xi, l, 0.0) >= 0.0);
        }

        #[test]
        fn tax_jump_homogeneous(v in -1e4..1e4f64, x in -1e4..1e4f64, k in 0.0..100.0f64, rc in 0.0..1.0f64, g in 0.0..0.99f64) {
            let a = tax_jump(k * v, k * x, rc, g);
            let b = k * tax_jump(v, x, rc, g);
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs() + k * (v.abs() + x.abs())));
            if v >= x {
                prop_assert!((tax_jump(v, x, rc, g) + g * (1.0 - rc) * (v - x)).abs() <= 1e-9 * (1.0 + v.abs() + x.abs()));
            }
        }

        #[test]
        fn survival_non_increasing(h1 in 0.0..1.0f64, h2 in 0.0..1.0f64, t in 0.0..30.0f64, dt in 0.0..5.0f64) {
            let c = CreditCurve::new(vec![2.0, 7.0], vec![h1, h2], 0.4).unwrap();
            prop_assert!(c.survival(t + dt) <= c.survival(t));
        }
    }
}
