use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Continuously-compounded zero curve with log-linear discount factors.
///
/// `ln df` is linear between the knots `(0, 0), (t_1, -z_1 t_1), ...` and the
/// last segment's forward rate is extrapolated beyond the final pillar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CurveRepr", into = "CurveRepr")]
pub struct DiscountCurve {
    pillars: Vec<f64>,
    zero_rates: Vec<f64>,
    /// Knot times, starting at 0.
    knots: Vec<f64>,
    /// `ln df` at the knots.
    log_df: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct CurveRepr {
    pillars: Vec<f64>,
    zero_rates: Vec<f64>,
}

impl TryFrom<CurveRepr> for DiscountCurve {
    type Error = Error;
    fn try_from(r: CurveRepr) -> Result<Self> {
        DiscountCurve::new(r.pillars, r.zero_rates)
    }
}

impl From<DiscountCurve> for CurveRepr {
    fn from(c: DiscountCurve) -> Self {
        CurveRepr { pillars: c.pillars, zero_rates: c.zero_rates }
    }
}

/// Builds a curve from pillar times and zero rates.
pub fn build_discount_curve(pillars: &[f64], zero_rates: &[f64]) -> Result<DiscountCurve> {
    DiscountCurve::new(pillars.to_vec(), zero_rates.to_vec())
}

impl DiscountCurve {
    pub fn new(pillars: Vec<f64>, zero_rates: Vec<f64>) -> Result<Self> {
        if pillars.is_empty() || pillars.len() != zero_rates.len() {
            return Err(Error::validation(
                "discount curve needs one zero rate per pillar and at least one pillar",
            ));
        }
        if pillars.iter().chain(&zero_rates).any(|v| !v.is_finite()) {
            return Err(Error::validation("discount curve inputs must be finite"));
        }
        if !(pillars[0] > 0.0) {
            return Err(Error::validation("first curve pillar must be after time 0"));
        }
        if pillars.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::validation("curve pillars must be strictly increasing"));
        }
        let mut knots = Vec::with_capacity(pillars.len() + 1);
        let mut log_df = Vec::with_capacity(pillars.len() + 1);
        knots.push(0.0);
        log_df.push(0.0);
        for (&t, &z) in pillars.iter().zip(&zero_rates) {
            knots.push(t);
            log_df.push(-z * t);
        }
        Ok(Self { pillars, zero_rates, knots, log_df })
    }

    pub fn flat(rate: f64) -> Self {
        Self::new(vec![1.0], vec![rate]).expect("flat curve")
    }

    pub fn pillars(&self) -> &[f64] {
        &self.pillars
    }

    pub fn zero_rates(&self) -> &[f64] {
        &self.zero_rates
    }

    fn segment(&self, t: f64) -> usize {
        // segment i spans knots[i]..knots[i+1]; right-continuous at knots
        let n = self.knots.len();
        let idx = self.knots.partition_point(|&k| k <= t);
        idx.clamp(1, n - 1) - 1
    }

    pub fn log_discount(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let i = self.segment(t);
        let (t0, t1) = (self.knots[i], self.knots[i + 1]);
        let (l0, l1) = (self.log_df[i], self.log_df[i + 1]);
        if t == t1 {
            return l1;
        }
        l0 + (l1 - l0) * (t - t0) / (t1 - t0)
    }

    pub fn discount(&self, t: f64) -> f64 {
        self.log_discount(t).exp()
    }

    /// Instantaneous forward rate, piecewise constant between knots.
    pub fn forward(&self, t: f64) -> f64 {
        let i = self.segment(t.max(0.0));
        -(self.log_df[i + 1] - self.log_df[i]) / (self.knots[i + 1] - self.knots[i])
    }

    pub fn zero_rate(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.forward(0.0);
        }
        -self.log_discount(t) / t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_curve_is_unit() {
        let c = build_discount_curve(&[10.0], &[0.0]).unwrap();
        for t in [0.0, 0.3, 5.0, 10.0, 40.0] {
            assert_eq!(c.discount(t), 1.0);
        }
    }

    #[test]
    fn flat_curve() {
        let c = build_discount_curve(&[1.0, 10.0], &[0.02, 0.02]).unwrap();
        assert!((c.discount(5.0) - (-0.10f64).exp()).abs() < 1e-15);
        assert_eq!(c.discount(0.0), 1.0);
        assert!((c.forward(3.0) - 0.02).abs() < 1e-15);
        assert!((c.discount(20.0) - (-0.4f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn log_linear_between_pillars() {
        let c = build_discount_curve(&[1.0, 2.0], &[0.01, 0.03]).unwrap();
        // ln df(1) = -0.01, ln df(2) = -0.06, midpoint -0.035
        assert!((c.discount(1.5) - (-0.035f64).exp()).abs() < 1e-15);
        assert!((c.discount(1.0) - (-0.01f64).exp()).abs() < 1e-16);
        assert!((c.discount(2.0) - (-0.06f64).exp()).abs() < 1e-16);
        assert!((c.forward(1.5) - 0.05).abs() < 1e-14);
        assert!((c.forward(0.5) - 0.01).abs() < 1e-14);
        // extrapolated with the last forward
        assert!((c.discount(3.0) - (-0.11f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_pillars() {
        assert!(build_discount_curve(&[2.0, 1.0], &[0.01, 0.01]).is_err());
        assert!(build_discount_curve(&[1.0, 1.0], &[0.01, 0.01]).is_err());
        assert!(build_discount_curve(&[0.0, 1.0], &[0.01, 0.01]).is_err());
        assert!(build_discount_curve(&[1.0], &[0.01, 0.01]).is_err());
        assert!(build_discount_curve(&[], &[]).is_err());
    }

    #[test]
    fn serde_roundtrip_validates() {
        let c: DiscountCurve = serde_json::from_str(r#"{"pillars":[1,5],"zeroRates":[0.01,0.02]}"#).unwrap();
        assert_eq!(c.pillars(), &[1.0, 5.0]);
        assert!(serde_json::from_str::<DiscountCurve>(r#"{"pillars":[5,1],"zeroRates":[0.01,0.02]}"#).is_err());
    }
}
