//! Valuation adjustments as deterministic time integrals over precomputed
//! exposure and capital profiles, for the own-bond strategy with no shortfall
//! on own default.
//!
//! Each integrand has the form `rate(u) W(u) g(u)` with `W` the joint
//! survival weight. On every grid interval `g` is interpolated linearly and
//! integrated exactly against the exponential survival decay, so flat
//! profiles under flat hazards are integrated without error and smooth
//! profiles converge at second order.

use serde::{Deserialize, Serialize};

use crate::credit::{effective_hazard, CreditCurve, HedgePolicy, TaxPolicy};
use crate::error::{Error, Result};
use crate::exposure::{DiscountCurve, ExposureProfile};
use crate::quadrature::exponential_moments;
use crate::regcap::CapitalProfile;

#[derive(Debug, Clone)]
pub struct XvaInputs {
    /// Profile of the uncollateralized trades; discounting inside the expectations.
    pub exposure: ExposureProfile,
    pub capital: CapitalProfile,
    pub issuer: CreditCurve,
    pub counterparty: CreditCurve,
    pub hedge: HedgePolicy,
    pub tax: TaxPolicy,
    /// Cost of capital `gamma_K`.
    pub cost_of_capital: f64,
    /// Collateral spread `s_X`.
    pub collateral_spread: f64,
    /// Discounted expected collateral balance on the exposure grid.
    pub collateral: Vec<f64>,
    /// Initial curve, for `E[D(u)]` and `E[D(u) r(u)]` in the capital terms.
    pub discount: DiscountCurve,
    /// Notional used for bps conversion.
    pub notional: f64,
}

impl XvaInputs {
    pub fn validate(&self) -> Result<()> {
        self.exposure.validate()?;
        self.capital.validate()?;
        if self.capital.times != self.exposure.times {
            return Err(Error::validation("capital and exposure grids differ"));
        }
        if self.collateral.len() != self.exposure.len() {
            return Err(Error::validation("collateral profile does not match the exposure grid"));
        }
        if self.exposure.len() < 2 {
            return Err(Error::validation("exposure grid needs at least two points"));
        }
        if !self.cost_of_capital.is_finite() || !self.collateral_spread.is_finite() {
            return Err(Error::validation("cost of capital and collateral spread must be finite"));
        }
        if !(self.notional > 0.0) {
            return Err(Error::validation("bps notional must be positive"));
        }
        Ok(())
    }
}

/// One grid interval of the survival-weighted integral.
struct Interval {
    h: f64,
    /// Survival weight at the left end.
    weight: f64,
    m0: f64,
    m1: f64,
    issuer_hazard: f64,
    counterparty_hazard: f64,
    effective_hazard: f64,
}

struct Integrator {
    intervals: Vec<Interval>,
}

impl Integrator {
    fn new(times: &[f64], issuer: &CreditCurve, counterparty: &CreditCurve, hedge: &HedgePolicy) -> Result<Self> {
        let psi = hedge.hedge_fraction;
        let xi = hedge.price_of_risk;
        let cum = |t: f64| -> Result<(f64, f64, f64)> {
            let lb = issuer.integrated_hazard(t);
            let lc = counterparty.integrated_hazard(t);
            Ok((lb, lc, effective_hazard(lc, psi, xi)?))
        };
        let mut intervals = Vec::with_capacity(times.len().saturating_sub(1));
        let mut left = cum(times[0])?;
        for w in times.windows(2) {
            let h = w[1] - w[0];
            let right = cum(w[1])?;
            let issuer_hazard = (right.0 - left.0) / h;
            let counterparty_hazard = (right.1 - left.1) / h;
            let effective = effective_hazard(counterparty_hazard, psi, xi)?;
            let (m0, m1) = exponential_moments(issuer_hazard + effective, h);
            intervals.push(Interval {
                h,
                weight: (-(left.0 + left.2)).exp(),
                m0,
                m1,
                issuer_hazard,
                counterparty_hazard,
                effective_hazard: effective,
            });
            left = right;
        }
        Ok(Self { intervals })
    }

    /// `int rate(u) W(u) g(u) du` with `rate` constant per interval.
    fn integrate(&self, rate: impl Fn(&Interval) -> f64, g: &[f64]) -> f64 {
        self.intervals
            .iter()
            .enumerate()
            .map(|(k, iv)| {
                let slope = (g[k + 1] - g[k]) / iv.h;
                rate(iv) * iv.weight * (g[k] * iv.m0 + slope * iv.m1)
            })
            .sum()
    }
}

/// Adjustment components. In currency or bps depending on context.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct XvaComponents {
    pub cva: f64,
    pub dva: f64,
    pub fca: f64,
    pub colva: f64,
    pub kva_mr: f64,
    pub kva_ccr: f64,
    pub kva_cva_var: f64,
    pub tva: f64,
    pub total: f64,
}

impl XvaComponents {
    pub fn kva(&self) -> f64 {
        self.kva_mr + self.kva_ccr + self.kva_cva_var
    }

    fn with_total(mut self) -> Self {
        self.total = self.cva + self.dva + self.fca + self.colva + self.kva_mr + self.kva_ccr + self.kva_cva_var + self.tva;
        self
    }

    fn scaled(&self, k: f64) -> Self {
        Self {
            cva: self.cva * k,
            dva: self.dva * k,
            fca: self.fca * k,
            colva: self.colva * k,
            kva_mr: self.kva_mr * k,
            kva_ccr: self.kva_ccr * k,
            kva_cva_var: self.kva_cva_var * k,
            tva: self.tva * k,
            total: 0.0,
        }
        .with_total()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XvaBreakdown {
    pub currency: XvaComponents,
    pub bps: XvaComponents,
}

/// KVA split by capital component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KvaSplit {
    pub market_risk: f64,
    pub ccr: f64,
    pub cva_var: f64,
}

impl KvaSplit {
    pub fn total(&self) -> f64 {
        self.market_risk + self.ccr + self.cva_var
    }
}

/// Evaluates every adjustment on one set of inputs, sharing the survival
/// weights between components.
pub struct XvaEngine<'a> {
    inputs: &'a XvaInputs,
    integrator: Integrator,
}

impl<'a> XvaEngine<'a> {
    pub fn new(inputs: &'a XvaInputs) -> Result<Self> {
        inputs.validate()?;
        let integrator = Integrator::new(&inputs.exposure.times, &inputs.issuer, &inputs.counterparty, &inputs.hedge)?;
        Ok(Self { inputs, integrator })
    }

    pub fn cva(&self) -> f64 {
        let lgd = 1.0 - self.inputs.counterparty.recovery();
        -lgd * self.integrator.integrate(|iv| iv.effective_hazard, &self.inputs.exposure.epe)
    }

    pub fn dva(&self) -> f64 {
        let lgd = 1.0 - self.inputs.issuer.recovery();
        -lgd * self.integrator.integrate(|iv| iv.issuer_hazard, &self.inputs.exposure.ene)
    }

    pub fn fca(&self) -> f64 {
        let lgd = 1.0 - self.inputs.issuer.recovery();
        -lgd * self.integrator.integrate(|iv| iv.issuer_hazard, &self.inputs.exposure.epe)
    }

    pub fn colva(&self) -> f64 {
        let s = self.inputs.collateral_spread;
        -self.integrator.integrate(|_| s, &self.inputs.collateral)
    }

    /// `E[D(u)] K(u) (gamma_K - f(0, u) phi)` on the grid for one capital column.
    fn capital_integrand(&self, capital: impl Fn(usize) -> f64, funding: f64) -> Vec<f64> {
        let gk = self.inputs.cost_of_capital;
        self.inputs
            .exposure
            .times
            .iter()
            .enumerate()
            .map(|(k, &u)| {
                let d = self.inputs.discount.discount(u);
                d * (gk - self.inputs.discount.forward(u) * funding) * capital(k)
            })
            .collect()
    }

    pub fn kva_split(&self) -> KvaSplit {
        let cap = &self.inputs.capital;
        let psi = self.inputs.hedge.hedge_fraction;
        let phi = self.inputs.hedge.capital_funding;
        let column = |pick: fn(&crate::regcap::NetCapital) -> f64| {
            let g = self.capital_integrand(|k| pick(&cap.net(k, psi)), phi);
            -self.integrator.integrate(|_| 1.0, &g)
        };
        KvaSplit {
            market_risk: column(|n| n.market_risk),
            ccr: column(|n| n.ccr),
            cva_var: column(|n| n.cva_var),
        }
    }

    pub fn kva(&self) -> f64 {
        self.kva_split().total()
    }

    /// Tax on the capital return (full `gamma_K`) less the tax credit on the
    /// expected warehoused default loss, plus the optional own-default
    /// accrual and compensator terms.
    pub fn tva(&self) -> f64 {
        let inp = self.inputs;
        let gamma_e = inp.tax.rate;
        if gamma_e == 0.0 {
            return 0.0;
        }
        let psi = inp.hedge.hedge_fraction;
        let unhedged = 1.0 - psi;
        let lgd_c = 1.0 - inp.counterparty.recovery();
        let cap = &inp.capital;
        let g = self.capital_integrand(|k| cap.net(k, psi).total(), 0.0);
        let capital_tax = self.integrator.integrate(|_| 1.0, &g);
        let physical_loss = lgd_c
            * unhedged
            * self
                .integrator
                .integrate(|iv| inp.hedge.physical_hazard(iv.counterparty_hazard), &inp.exposure.epe);
        let mut tva = -gamma_e * (capital_tax - physical_loss);
        if inp.tax.tax_own_default_accruals {
            // the windfall accrual on own default is the FCA integrand
            tva += gamma_e * self.fca();
        }
        if inp.tax.tax_compensator {
            tva -= gamma_e * (1.0 + gamma_e) * physical_loss;
        }
        tva
    }

    pub fn breakdown(&self) -> XvaBreakdown {
        let kva = self.kva_split();
        let currency = XvaComponents {
            cva: self.cva(),
            dva: self.dva(),
            fca: self.fca(),
            colva: self.colva(),
            kva_mr: kva.market_risk,
            kva_ccr: kva.ccr,
            kva_cva_var: kva.cva_var,
            tva: self.tva(),
            total: 0.0,
        }
        .with_total();
        XvaBreakdown { currency, bps: currency.scaled(1e4 / self.inputs.notional) }
    }
}

pub fn cva(inputs: &XvaInputs) -> Result<f64> {
    Ok(XvaEngine::new(inputs)?.cva())
}

pub fn dva(inputs: &XvaInputs) -> Result<f64> {
    Ok(XvaEngine::new(inputs)?.dva())
}

pub fn fca(inputs: &XvaInputs) -> Result<f64> {
    Ok(XvaEngine::new(inputs)?.fca())
}

pub fn colva(inputs: &XvaInputs) -> Result<f64> {
    Ok(XvaEngine::new(inputs)?.colva())
}

pub fn kva(inputs: &XvaInputs) -> Result<KvaSplit> {
    Ok(XvaEngine::new(inputs)?.kva_split())
}

pub fn tva(inputs: &XvaInputs) -> Result<f64> {
    Ok(XvaEngine::new(inputs)?.tva())
}

pub fn breakdown(inputs: &XvaInputs) -> Result<XvaBreakdown> {
    Ok(XvaEngine::new(inputs)?.breakdown())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(step: f64, horizon: f64) -> Vec<f64> {
        let n = (horizon / step).round() as usize;
        (0..=n).map(|k| k as f64 * step).collect()
    }

    fn flat_inputs(times: Vec<f64>, epe: f64, ene: f64) -> XvaInputs {
        let n = times.len();
        let exposure = ExposureProfile::deterministic(times.clone(), vec![epe; n], vec![ene; n], vec![epe; n]).unwrap();
        XvaInputs {
            exposure,
            capital: CapitalProfile::zero(times),
            issuer: CreditCurve::flat(0.0, 0.4).unwrap(),
            counterparty: CreditCurve::flat(0.0, 0.4).unwrap(),
            hedge: HedgePolicy::full_hedge(),
            tax: TaxPolicy::none(),
            cost_of_capital: 0.1,
            collateral_spread: 0.0,
            collateral: vec![0.0; n],
            discount: DiscountCurve::flat(0.0),
            notional: 1e4,
        }
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn zero_inputs_give_zero_breakdown() {
        let inp = flat_inputs(grid(0.25, 10.0), 0.0, 0.0);
        let b = breakdown(&inp).unwrap();
        assert_eq!(b.currency, XvaComponents::default());
        assert_eq!(b.bps, XvaComponents::default());
    }

    #[test]
    fn constant_intensity_cva() {
        let mut inp = flat_inputs(grid(0.25, 10.0), 100.0, 0.0);
        inp.counterparty = CreditCurve::flat(0.02, 0.4).unwrap();
        let want = -0.6 * 100.0 * (1.0 - (-0.2f64).exp());
        assert!(rel(cva(&inp).unwrap(), want) < 1e-13);
        assert!((want + 10.88).abs() < 5e-3);
    }

    #[test]
    fn constant_intensity_dva_fca() {
        let mut inp = flat_inputs(grid(0.25, 10.0), 100.0, -100.0);
        // 100bp spread at 40% recovery, hazard quoted to three figures
        let lb = 0.0167;
        inp.issuer = CreditCurve::flat(lb, 0.4).unwrap();
        let want = 0.6 * 100.0 * (1.0 - (-lb * 10.0f64).exp());
        assert!(rel(dva(&inp).unwrap(), want) < 1e-13);
        assert!((want - 9.22).abs() < 1e-2);
        assert!(rel(fca(&inp).unwrap(), -want) < 1e-13);
    }

    #[test]
    fn constant_colva_and_kva() {
        let times = grid(0.25, 10.0);
        let n = times.len();
        let mut inp = flat_inputs(times.clone(), 0.0, 0.0);
        inp.collateral_spread = 0.001;
        inp.collateral = vec![100.0; n];
        assert!(rel(colva(&inp).unwrap(), -1.0) < 1e-13);
        let mut cap = CapitalProfile::zero(times);
        cap.ccr = vec![100.0; n];
        inp.capital = cap;
        let k = kva(&inp).unwrap();
        assert!(rel(k.ccr, -100.0) < 1e-13);
        assert_eq!(k.market_risk, 0.0);
        assert_eq!(k.cva_var, 0.0);
    }

    #[test]
    fn kva_funding_benefit_reduces_magnitude() {
        let times = grid(0.25, 10.0);
        let n = times.len();
        let mut inp = flat_inputs(times.clone(), 0.0, 0.0);
        inp.discount = DiscountCurve::flat(0.02);
        let mut cap = CapitalProfile::zero(times);
        cap.ccr = vec![100.0; n];
        inp.capital = cap;
        let k0 = kva(&inp).unwrap().total();
        inp.hedge.capital_funding = 1.0;
        let k1 = kva(&inp).unwrap().total();
        assert!(k0 < k1 && k1 < 0.0);
        // E[D r] = f(0, u) P(0, u), so flat 2% with gamma_K 10% scales by 0.8
        assert!(rel(k1, 0.8 * k0) < 1e-13);
    }

    #[test]
    fn warehousing_lowers_cva_with_positive_price_of_risk() {
        let mut inp = flat_inputs(grid(0.25, 10.0), 100.0, -50.0);
        inp.counterparty = CreditCurve::from_spread(0.025, 0.4).unwrap();
        inp.issuer = CreditCurve::from_spread(0.01, 0.4).unwrap();
        let hedged = breakdown(&inp).unwrap().currency;
        inp.hedge = HedgePolicy::new(0.0, 0.5, 0.0).unwrap();
        let pos = breakdown(&inp).unwrap().currency;
        inp.hedge = HedgePolicy::new(0.0, -0.5, 0.0).unwrap();
        let neg = breakdown(&inp).unwrap().currency;
        assert!(pos.cva.abs() < hedged.cva.abs() && hedged.cva.abs() < neg.cva.abs());
        assert!(pos.dva > hedged.dva && hedged.dva > neg.dva);
        assert!(pos.fca < hedged.fca);
    }

    #[test]
    fn full_hedge_ignores_price_of_risk() {
        let mut inp = flat_inputs(grid(0.25, 10.0), 100.0, -50.0);
        inp.counterparty = CreditCurve::from_spread(0.025, 0.4).unwrap();
        inp.issuer = CreditCurve::from_spread(0.01, 0.4).unwrap();
        inp.tax = TaxPolicy::new(0.21, false).unwrap();
        let mut cap = CapitalProfile::zero(inp.exposure.times.clone());
        cap.ccr = vec![10.0; cap.len()];
        cap.cva_var = vec![5.0; cap.len()];
        cap.cva_var_relief = vec![5.0; cap.len()];
        inp.capital = cap;
        let a = breakdown(&inp).unwrap();
        inp.hedge.price_of_risk = -0.7;
        let b = breakdown(&inp).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.currency.kva_cva_var, 0.0);
    }

    #[test]
    fn tax_options() {
        let mut inp = flat_inputs(grid(0.25, 10.0), 100.0, -50.0);
        inp.counterparty = CreditCurve::from_spread(0.025, 0.4).unwrap();
        inp.issuer = CreditCurve::from_spread(0.01, 0.4).unwrap();
        inp.hedge = HedgePolicy::new(0.0, 0.0, 0.0).unwrap();
        inp.tax = TaxPolicy::new(0.21, false).unwrap();
        let base = tva(&inp).unwrap();
        // no capital: the whole TVA is the tax credit on warehoused loss
        let lc = 0.025 / 0.6;
        let lb = 0.01 / 0.6;
        let c = lc + lb;
        let credit = 0.21 * 0.6 * lc * 100.0 * (1.0 - (-c * 10.0f64).exp()) / c;
        assert!(rel(base, credit) < 1e-12);
        inp.tax.tax_own_default_accruals = true;
        let with_ib = tva(&inp).unwrap();
        assert!(rel(with_ib - base, 0.21 * fca(&inp).unwrap()) < 1e-12);
        inp.tax.tax_own_default_accruals = false;
        inp.tax.tax_compensator = true;
        let with_comp = tva(&inp).unwrap();
        assert!(rel(with_comp - base, -1.21 * credit) < 1e-12);
    }

    #[test]
    fn misaligned_grids_rejected() {
        let mut inp = flat_inputs(grid(0.25, 10.0), 1.0, 0.0);
        inp.capital = CapitalProfile::zero(grid(0.5, 10.0));
        assert!(breakdown(&inp).is_err());
        let mut inp = flat_inputs(grid(0.25, 10.0), 1.0, 0.0);
        inp.collateral.pop();
        assert!(breakdown(&inp).is_err());
    }

    #[test]
    fn quadrature_is_second_order_for_curved_profiles() {
        // EPE(u) = sin(pi u / T) on a 10y horizon against a closed form
        let t_end = 10.0;
        let (lc, lb) = (0.03, 0.0);
        let k = std::f64::consts::PI / t_end;
        let c = lc + lb;
        // int_0^T e^{-c u} sin(k u) du
        let exact = (k - (-c * t_end).exp() * (c * (k * t_end).sin() + k * (k * t_end).cos())) / (c * c + k * k);
        let want = -0.6 * lc * exact;
        let err = |step: f64| {
            let times = grid(step, t_end);
            let epe: Vec<f64> = times.iter().map(|u| (k * u).sin().max(0.0)).collect();
            let n = times.len();
            let mut inp = flat_inputs(times.clone(), 0.0, 0.0);
            inp.exposure = ExposureProfile::deterministic(times, epe.clone(), vec![0.0; n], epe).unwrap();
            inp.counterparty = CreditCurve::flat(lc, 0.4).unwrap();
            (cva(&inp).unwrap() - want).abs()
        };
        let (e1, e2) = (err(0.5), err(0.25));
        assert!((e1 / e2 - 4.0).abs() < 0.2, "{}", e1 / e2);
        assert!(err(0.25) / want.abs() < 1e-3);
    }

    proptest! {
        #[test]
        fn signs_and_tax_identity(
            epe in proptest::collection::vec(0.0..1e3f64, 41),
            ene in proptest::collection::vec(-1e3..0.0f64, 41),
            ccr in proptest::collection::vec(0.0..1e2f64, 41),
            cvak in proptest::collection::vec(0.0..1e2f64, 41),
            spread in 0.0..0.08f64, xi in -1.0..1.0f64,
        ) {
            let times = grid(0.25, 10.0);
            let mut inp = flat_inputs(times.clone(), 0.0, 0.0);
            inp.exposure = ExposureProfile::deterministic(times.clone(), epe.clone(), ene, epe).unwrap();
            inp.counterparty = CreditCurve::from_spread(spread, 0.4).unwrap();
            inp.issuer = CreditCurve::from_spread(0.01, 0.4).unwrap();
            inp.discount = DiscountCurve::flat(0.02);
            inp.tax = TaxPolicy::new(0.21, false).unwrap();
            inp.hedge = HedgePolicy::new(1.0, xi, 0.0).unwrap();
            let mut cap = CapitalProfile::zero(times);
            cap.ccr = ccr;
            cap.cva_var = cvak.clone();
            cap.cva_var_relief = cvak;
            inp.capital = cap;
            let b = breakdown(&inp).unwrap().currency;
            prop_assert!(b.cva <= 0.0 && b.dva >= 0.0 && b.fca <= 0.0);
            prop_assert!(b.kva_mr <= 0.0 && b.kva_ccr <= 0.0 && b.kva_cva_var <= 0.0);
            let sum = b.cva + b.dva + b.fca + b.colva + b.kva_mr + b.kva_ccr + b.kva_cva_var + b.tva;
            prop_assert_eq!(b.total, sum);
            let kva = b.kva();
            if kva != 0.0 {
                prop_assert!(((b.tva - 0.21 * kva) / (0.21 * kva)).abs() <= 1e-12);
            }
        }
    }
}
