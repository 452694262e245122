use serde::{Deserialize, Serialize};

use super::curve::DiscountCurve;
use crate::error::{Error, Result};

/// One-factor Gaussian short rate `r(t) = x(t) + shift(t)` with
/// `dx = -a x dt + sigma dW`, `x(0) = 0`.
///
/// When fitted, the deterministic shift reproduces the initial discount curve
/// exactly. Otherwise the shift is the constant short rate `f(0, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ShortRateModel {
    pub mean_reversion: f64,
    pub volatility: f64,
    #[serde(default = "default_fit")]
    pub fit_to_curve: bool,
}

fn default_fit() -> bool {
    true
}

impl Default for ShortRateModel {
    fn default() -> Self {
        Self { mean_reversion: 0.05, volatility: 0.008, fit_to_curve: true }
    }
}

impl ShortRateModel {
    pub fn new(mean_reversion: f64, volatility: f64) -> Result<Self> {
        let m = Self { mean_reversion, volatility, fit_to_curve: true };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mean_reversion > 0.0) || !self.mean_reversion.is_finite() {
            return Err(Error::validation("mean reversion speed must be positive"));
        }
        if !(self.volatility >= 0.0) || !self.volatility.is_finite() {
            return Err(Error::validation("short rate volatility must be non-negative"));
        }
        Ok(())
    }

    /// `B(tau) = (1 - e^{-a tau}) / a`.
    pub fn b(&self, tau: f64) -> f64 {
        -(-self.mean_reversion * tau).exp_m1() / self.mean_reversion
    }

    /// `Var(int_t^T x ds | x_t)` for `tau = T - t`.
    pub fn integrated_variance(&self, tau: f64) -> f64 {
        let a = self.mean_reversion;
        let s2 = self.volatility * self.volatility;
        let b2 = -(-2.0 * a * tau).exp_m1() / (2.0 * a);
        s2 / (a * a) * (tau - 2.0 * self.b(tau) + b2)
    }

    /// `int_t^T shift(s) ds`.
    pub fn shift_integral(&self, curve: &DiscountCurve, t: f64, t_end: f64) -> f64 {
        if self.fit_to_curve {
            curve.log_discount(t) - curve.log_discount(t_end)
                + 0.5 * (self.integrated_variance(t_end) - self.integrated_variance(t))
        } else {
            curve.forward(0.0) * (t_end - t)
        }
    }

    /// Deterministic part of the short rate.
    pub fn shift(&self, curve: &DiscountCurve, t: f64) -> f64 {
        if self.fit_to_curve {
            let a = self.mean_reversion;
            let e = -(-a * t).exp_m1();
            curve.forward(t) + self.volatility * self.volatility / (2.0 * a * a) * e * e
        } else {
            curve.forward(0.0)
        }
    }

    /// `(ln A, B)` with `P(t, T) = exp(ln A - B x(t))`.
    pub fn bond_coefficients(&self, curve: &DiscountCurve, t: f64, t_end: f64) -> BondCoefficients {
        let tau = t_end - t;
        BondCoefficients {
            log_a: -self.shift_integral(curve, t, t_end) + 0.5 * self.integrated_variance(tau),
            b: self.b(tau),
        }
    }

    /// Zero-coupon bond `P(t, T)` given the factor `x(t)`.
    pub fn zero_bond(&self, curve: &DiscountCurve, t: f64, t_end: f64, x: f64) -> f64 {
        self.bond_coefficients(curve, t, t_end).price(x)
    }
}

/// Affine bond-price coefficients for a fixed `(t, T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BondCoefficients {
    pub log_a: f64,
    pub b: f64,
}

impl BondCoefficients {
    #[inline]
    pub fn price(&self, x: f64) -> f64 {
        (self.log_a - self.b * x).exp()
    }
}
