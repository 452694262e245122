use serde::{Deserialize, Serialize};

use super::curve::DiscountCurve;
use super::model::{BondCoefficients, ShortRateModel};
use crate::error::{Error, Result};

pub(crate) const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SwapSide {
    /// Pay fixed, receive floating.
    Pay,
    /// Receive fixed, pay floating.
    Receive,
}

impl SwapSide {
    pub fn sign(self) -> f64 {
        match self {
            SwapSide::Pay => 1.0,
            SwapSide::Receive => -1.0,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            SwapSide::Pay => SwapSide::Receive,
            SwapSide::Receive => SwapSide::Pay,
        }
    }
}

/// Spot-starting vanilla swap. The floating leg pays the simple rate fixed at
/// the start of each accrual period; both legs share the same schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SwapSpec {
    pub notional: f64,
    pub fixed_rate: f64,
    /// Years.
    pub maturity: f64,
    /// Payments per year.
    pub frequency: u32,
    pub side: SwapSide,
    #[serde(default)]
    pub collateralized: bool,
}

/// Short-rate state needed to value a swap at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RateState {
    /// Gaussian factor `x(t)`.
    pub x: f64,
    /// Simple rate fixed at the start of the current accrual period. Needed
    /// only when `t` falls strictly inside a period.
    pub fixing: Option<f64>,
}

impl SwapSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.notional > 0.0) || !self.notional.is_finite() {
            return Err(Error::validation("swap notional must be positive"));
        }
        if !(self.maturity > 0.0) || !self.maturity.is_finite() {
            return Err(Error::validation("swap maturity must be positive"));
        }
        if !matches!(self.frequency, 1 | 2 | 4) {
            return Err(Error::validation(format!(
                "payment frequency {} not in {{1, 2, 4}}",
                self.frequency
            )));
        }
        if !self.fixed_rate.is_finite() {
            return Err(Error::validation("fixed rate must be finite"));
        }
        let n = self.maturity * self.frequency as f64;
        if (n - n.round()).abs() > 1e-6 || n.round() < 1.0 {
            return Err(Error::validation(
                "maturity must be a whole number of payment periods",
            ));
        }
        Ok(())
    }

    pub fn accrual(&self) -> f64 {
        1.0 / self.frequency as f64
    }

    pub fn payment_count(&self) -> usize {
        (self.maturity * self.frequency as f64).round() as usize
    }

    /// Payment times `T_1 .. T_n`.
    pub fn payment_times(&self) -> Vec<f64> {
        let tau = self.accrual();
        (1..=self.payment_count()).map(|i| i as f64 * tau).collect()
    }

    /// Index (1-based) of the first payment strictly after `t`.
    fn next_payment(&self, t: f64) -> usize {
        let tau = self.accrual();
        let k = ((t + TIME_EPS) / tau).floor() as usize + 1;
        k.min(self.payment_count() + 1)
    }

    /// Whether `t` is a reset date (period start) of the swap.
    pub fn is_reset(&self, t: f64) -> bool {
        let tau = self.accrual();
        let k = (t / tau).round();
        (t - k * tau).abs() <= TIME_EPS && k < self.payment_count() as f64
    }

    /// Remaining fixed-leg annuity `sum tau P(t, T_i)` over payments after `t`.
    pub fn annuity(&self, model: &ShortRateModel, curve: &DiscountCurve, t: f64, x: f64) -> f64 {
        let tau = self.accrual();
        (self.next_payment(t)..=self.payment_count())
            .map(|i| tau * model.zero_bond(curve, t, i as f64 * tau, x))
            .sum()
    }

    /// Par rate at time 0 on the initial curve.
    pub fn par_rate(&self, curve: &DiscountCurve) -> f64 {
        let tau = self.accrual();
        let annuity: f64 = self.payment_times().iter().map(|&t| tau * curve.discount(t)).sum();
        (1.0 - curve.discount(self.maturity)) / annuity
    }

    /// Simple rate fixed at reset `t` for the period ending `t + tau`.
    pub fn fixing_at(&self, model: &ShortRateModel, curve: &DiscountCurve, t: f64, x: f64) -> f64 {
        let tau = self.accrual();
        (1.0 / model.zero_bond(curve, t, t + tau, x) - 1.0) / tau
    }
}

/// Bond coefficients needed to value a swap at one fixed time; built once
/// per grid point and reused across paths.
#[derive(Debug, Clone)]
pub struct SwapSnapshot {
    sign_notional: f64,
    fixed_rate: f64,
    accrual: f64,
    expired: bool,
    at_reset: bool,
    end: BondCoefficients,
    next: BondCoefficients,
    annuity: Vec<BondCoefficients>,
    fixing_bond: Option<BondCoefficients>,
    t: f64,
}

impl SwapSnapshot {
    pub fn new(spec: &SwapSpec, model: &ShortRateModel, curve: &DiscountCurve, t: f64) -> Result<Self> {
        if t > spec.maturity + TIME_EPS {
            return Err(Error::domain(format!(
                "valuation time {t} beyond swap maturity {}",
                spec.maturity
            )));
        }
        if t < -TIME_EPS {
            return Err(Error::domain("valuation time before 0"));
        }
        let n = spec.payment_count();
        let k = spec.next_payment(t);
        let tau = spec.accrual();
        let expired = k > n;
        let coeff = |end: f64| model.bond_coefficients(curve, t, end);
        let (end, next, annuity) = if expired {
            let unit = BondCoefficients { log_a: 0.0, b: 0.0 };
            (unit, unit, Vec::new())
        } else {
            (
                coeff(spec.maturity),
                coeff(k as f64 * tau),
                (k..=n).map(|i| coeff(i as f64 * tau)).collect(),
            )
        };
        let reset = (k as f64 - 1.0) * tau;
        Ok(Self {
            sign_notional: spec.side.sign() * spec.notional,
            fixed_rate: spec.fixed_rate,
            accrual: tau,
            expired,
            at_reset: (t - reset).abs() <= TIME_EPS,
            end,
            next,
            annuity,
            fixing_bond: spec.is_reset(t).then(|| coeff(t + tau)),
            t,
        })
    }

    /// New simple-rate fixing if `t` is a reset date.
    pub fn new_fixing(&self, x: f64) -> Option<f64> {
        self.fixing_bond.map(|c| (1.0 / c.price(x) - 1.0) / self.accrual)
    }

    pub fn value(&self, state: &RateState) -> Result<f64> {
        if self.expired {
            return Ok(0.0);
        }
        let x = state.x;
        let end = self.end.price(x);
        let floating = if self.at_reset {
            1.0 - end
        } else {
            let fixing = state.fixing.ok_or_else(|| {
                Error::domain(format!(
                    "swap valued inside accrual period at {} without a fixing",
                    self.t
                ))
            })?;
            (1.0 + self.accrual * fixing) * self.next.price(x) - end
        };
        let annuity: f64 = self.annuity.iter().map(|c| self.accrual * c.price(x)).sum();
        Ok(self.sign_notional * (floating - self.fixed_rate * annuity))
    }
}

/// Value at `t` of the cash flows paid strictly after `t`.
///
/// Equals `sign * notional * A(t) * (S(t) - K)` with `A` the remaining annuity
/// and `S` the rate making the remaining flows worth zero.
pub fn value_swap(
    spec: &SwapSpec,
    model: &ShortRateModel,
    curve: &DiscountCurve,
    state: &RateState,
    t: f64,
) -> Result<f64> {
    SwapSnapshot::new(spec, model, curve, t)?.value(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn payer(rate: f64) -> SwapSpec {
        SwapSpec { notional: 1e6, fixed_rate: rate, maturity: 10.0, frequency: 2, side: SwapSide::Pay, collateralized: false }
    }

    #[test]
    fn at_market_swap_is_worth_zero() {
        let c = DiscountCurve::new(vec![1.0, 5.0, 10.0], vec![0.01, 0.02, 0.025]).unwrap();
        let m = ShortRateModel::default();
        let s = payer(payer(0.0).par_rate(&c));
        let v = value_swap(&s, &m, &c, &RateState::default(), 0.0).unwrap();
        assert!(v.abs() < 1e-8);
    }

    #[test]
    fn expired_swap_is_worth_zero() {
        let c = DiscountCurve::flat(0.02);
        let m = ShortRateModel::default();
        let v = value_swap(&payer(0.027), &m, &c, &RateState { x: 0.01, fixing: Some(0.03) }, 10.0).unwrap();
        assert_eq!(v, 0.0);
        assert!(value_swap(&payer(0.027), &m, &c, &RateState::default(), 10.5).is_err());
    }

    #[test]
    fn zero_vol_matches_deterministic_cash_flows() {
        let c = DiscountCurve::flat(0.02);
        let m = ShortRateModel { mean_reversion: 0.05, volatility: 0.0, fit_to_curve: true };
        let s = payer(0.027);
        // oracle: forward-rate floating coupons and fixed coupons discounted on the curve
        let tau = 0.5;
        let mut float = 0.0;
        let mut annuity = 0.0;
        for i in 1..=20 {
            let (t0, t1) = ((i - 1) as f64 * tau, i as f64 * tau);
            let fwd = (c.discount(t0) / c.discount(t1) - 1.0) / tau;
            float += tau * fwd * c.discount(t1);
            annuity += tau * c.discount(t1);
        }
        let par = float / annuity;
        let want = (par - 0.027) * annuity * 1e6;
        let got = value_swap(&s, &m, &c, &RateState::default(), 0.0).unwrap();
        assert!(want < 0.0);
        assert!((got - want).abs() < 1e-9 * want.abs());
        let recv = SwapSpec { side: SwapSide::Receive, ..s };
        assert_eq!(value_swap(&recv, &m, &c, &RateState::default(), 0.0).unwrap(), -got);
    }

    #[test]
    fn inside_period_needs_fixing() {
        let c = DiscountCurve::flat(0.02);
        let m = ShortRateModel::default();
        let s = payer(0.02);
        assert!(value_swap(&s, &m, &c, &RateState::default(), 0.25).is_err());
        // with zero vol and the forward fixing, the value is the same as
        // discounting forward cash flows from 0.25
        let m0 = ShortRateModel { volatility: 0.0, ..m };
        let fix = s.fixing_at(&m0, &c, 0.0, 0.0);
        let v = value_swap(&s, &m0, &c, &RateState { x: 0.0, fixing: Some(fix) }, 0.25).unwrap();
        let v0 = value_swap(&s, &m0, &c, &RateState::default(), 0.0).unwrap();
        // no cash flow between 0 and 0.25, so value grows at the forward rate
        assert!((v - v0 / c.discount(0.25)).abs() < 1e-7);
    }

    #[test]
    fn schedule_and_validation() {
        let s = payer(0.027);
        assert_eq!(s.payment_count(), 20);
        assert!(s.is_reset(0.0) && s.is_reset(9.5) && !s.is_reset(10.0) && !s.is_reset(0.25));
        assert!(SwapSpec { frequency: 3, ..s }.validate().is_err());
        assert!(SwapSpec { notional: -1.0, ..s }.validate().is_err());
        assert!(SwapSpec { maturity: 10.3, ..s }.validate().is_err());
        assert!(s.validate().is_ok());
    }
}
