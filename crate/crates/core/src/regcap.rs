//! Standardized regulatory capital profiles: market risk (duration method),
//! counterparty credit risk (current exposure method) and CVA VAR.
//!
//! Capital at a future date `u` is deterministic. CEM takes the expected
//! positive exposure at `u` as its mark-to-market input and re-bands the
//! add-on on residual maturity as the trade ages.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exposure::{DiscountCurve, ExposureProfile, SwapSpec};

/// 99% one-sided normal quantile used by the standardized CVA charge.
pub const CVA_VAR_QUANTILE: f64 = 2.33;

/// Number of maturity bands in the duration method.
pub const RATE_BANDS: usize = 15;

/// Upper edge (years) of each band; the last band is open.
const BAND_EDGES: [f64; RATE_BANDS - 1] = [
    1.0 / 12.0,
    0.25,
    0.5,
    1.0,
    1.9,
    2.8,
    3.6,
    4.3,
    5.7,
    7.3,
    9.3,
    10.6,
    12.0,
    20.0,
];

/// Assumed yield change (percentage points) per band.
const YIELD_CHANGE: [f64; RATE_BANDS] = [
    1.00, 1.00, 1.00, 1.00, 0.90, 0.80, 0.75, 0.75, 0.70, 0.65, 0.60, 0.60, 0.60, 0.60, 0.60,
];

/// Zone of each band: 0 up to 1y, 1 up to 3.6y, 2 beyond.
const BAND_ZONE: [usize; RATE_BANDS] = [0, 0, 0, 0, 1, 1, 1, 2, 2, 2, 2, 2, 2, 2, 2];
const ZONE_DISALLOWANCE: [f64; 3] = [0.40, 0.30, 0.30];
const ADJACENT_ZONE_DISALLOWANCE: f64 = 0.40;
const OUTER_ZONE_DISALLOWANCE: f64 = 1.00;

/// Counterparty rating data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CounterpartyProfile {
    pub rating: String,
    pub cds_spread_bp: f64,
    /// Standardized CCR risk weight.
    pub risk_weight: f64,
    /// Standardized CVA risk weight `w_i`.
    pub cva_weight: f64,
    #[serde(default = "default_recovery")]
    pub recovery: f64,
}

fn default_recovery() -> f64 {
    0.4
}

impl CounterpartyProfile {
    pub fn validate(&self) -> Result<()> {
        if !(self.cds_spread_bp >= 0.0) || !self.cds_spread_bp.is_finite() {
            return Err(Error::validation(format!("{}: CDS spread must be non-negative", self.rating)));
        }
        if !(self.risk_weight > 0.0) || !self.risk_weight.is_finite() {
            return Err(Error::validation(format!("{}: risk weight must be positive", self.rating)));
        }
        if !(self.cva_weight > 0.0) || !self.cva_weight.is_finite() {
            return Err(Error::validation(format!("{}: CVA risk weight must be positive", self.rating)));
        }
        if !(0.0..1.0).contains(&self.recovery) {
            return Err(Error::validation(format!("{}: recovery must lie in [0, 1)", self.rating)));
        }
        Ok(())
    }

    pub fn spread(&self) -> f64 {
        self.cds_spread_bp * 1e-4
    }

    pub fn hazard(&self) -> Result<f64> {
        crate::credit::hazard_from_spread(self.spread(), self.recovery)
    }
}

/// The four example ratings: CDS spread, standardized weight, CVA weight.
pub fn builtin_ratings() -> Vec<CounterpartyProfile> {
    [("AAA", 30.0, 0.20, 0.007), ("A", 75.0, 0.50, 0.008), ("BB", 250.0, 1.00, 0.02), ("CCC", 750.0, 1.50, 0.10)]
        .into_iter()
        .map(|(r, s, w, c)| CounterpartyProfile {
            rating: r.to_string(),
            cds_spread_bp: s,
            risk_weight: w,
            cva_weight: c,
            recovery: default_recovery(),
        })
        .collect()
}

pub fn builtin_rating(label: &str) -> Option<CounterpartyProfile> {
    builtin_ratings().into_iter().find(|c| c.rating == label)
}

/// CEM add-on factor for interest-rate contracts.
pub fn cem_add_on(residual_maturity: f64) -> f64 {
    if residual_maturity <= 1.0 {
        0.0
    } else if residual_maturity <= 5.0 {
        0.005
    } else {
        0.015
    }
}

/// Exposure at default under the current exposure method.
pub fn ead_cem(mtm: f64, notional: f64, residual_maturity: f64) -> Result<f64> {
    if !(notional >= 0.0) {
        return Err(Error::validation("notional must be non-negative"));
    }
    if !(residual_maturity >= 0.0) {
        return Err(Error::validation("residual maturity must be non-negative"));
    }
    Ok(mtm.max(0.0) + notional * cem_add_on(residual_maturity))
}

pub fn ccr_capital(ead: f64, risk_weight: f64, min_ratio: f64) -> f64 {
    ead * risk_weight * min_ratio
}

/// Standardized CVA charge for one counterparty in a large portfolio, where
/// the idiosyncratic square-root term is dropped:
///
/// `K = 2.33 sqrt(h) |w (M EAD - M_hedge B)|`.
///
/// The full charge is
/// `2.33 sqrt(h) sqrt((sum 0.5 w_i (M_i EAD_i - M_i^h B_i) - sum w_ind M_ind B_ind)^2 + sum 0.75 w_i^2 (M_i EAD_i - M_i^h B_i)^2)`.
pub fn cva_var_capital(ead: f64, cva_weight: f64, maturity: f64, hedge_notional: f64, hedge_maturity: f64, horizon: f64) -> f64 {
    CVA_VAR_QUANTILE * horizon.sqrt() * (cva_weight * (maturity * ead - hedge_maturity * hedge_notional)).abs()
}

/// Discount applied to EAD in the CVA charge when exposure is not from an
/// internal model: `(1 - e^{-0.05 M}) / (0.05 M)`.
pub fn cva_ead_discount(maturity: f64) -> f64 {
    let z = 0.05 * maturity;
    if z < 1e-8 {
        1.0
    } else {
        -(-z).exp_m1() / z
    }
}

/// Band index for a residual maturity in years.
pub fn rate_band(residual: f64) -> usize {
    BAND_EDGES.iter().position(|&e| residual <= e).unwrap_or(RATE_BANDS - 1)
}

/// Duration-method general market risk charge.
///
/// `net` holds the net dollar duration per band (value change for a 100%
/// parallel yield move, long positive). Positions are weighted by the band's
/// assumed yield change and then offset within zones, between adjacent zones
/// and between the outer zones; what remains is charged in full.
pub fn market_risk_capital(net: &[f64; RATE_BANDS]) -> f64 {
    let weighted: Vec<f64> = net.iter().zip(YIELD_CHANGE).map(|(p, dy)| p * dy * 0.01).collect();
    let mut charge = 0.0;
    let mut zone = [0.0f64; 3];
    for z in 0..3 {
        let (mut long, mut short) = (0.0, 0.0);
        for b in (0..RATE_BANDS).filter(|&b| BAND_ZONE[b] == z) {
            if weighted[b] > 0.0 {
                long += weighted[b];
            } else {
                short -= weighted[b];
            }
        }
        charge += ZONE_DISALLOWANCE[z] * long.min(short);
        zone[z] = long - short;
    }
    let mut offset = |i: usize, j: usize, rate: f64, zone: &mut [f64; 3]| {
        if zone[i] * zone[j] < 0.0 {
            let m = zone[i].abs().min(zone[j].abs());
            charge += rate * m;
            zone[i] -= m * zone[i].signum();
            zone[j] -= m * zone[j].signum();
        }
    };
    offset(0, 1, ADJACENT_ZONE_DISALLOWANCE, &mut zone);
    offset(1, 2, ADJACENT_ZONE_DISALLOWANCE, &mut zone);
    offset(0, 2, OUTER_ZONE_DISALLOWANCE, &mut zone);
    charge + zone.iter().sum::<f64>().abs()
}

/// Net dollar duration per band of a set of swaps seen from `t`, using curve
/// forwards for the floating leg. A payer is long a floating note maturing at
/// the next payment and short the fixed bond.
pub fn swap_rate_sensitivities(swaps: &[SwapSpec], curve: &DiscountCurve, t: f64) -> [f64; RATE_BANDS] {
    let mut total = [0.0; RATE_BANDS];
    for s in swaps {
        let per_unit = unit_swap_sensitivities(s, curve, t);
        let scale = s.side.sign() * s.notional;
        for (acc, v) in total.iter_mut().zip(per_unit) {
            *acc += scale * v;
        }
    }
    total
}

fn unit_swap_sensitivities(s: &SwapSpec, curve: &DiscountCurve, t: f64) -> [f64; RATE_BANDS] {
    let mut bands = [0.0; RATE_BANDS];
    let tau = s.accrual();
    let df_t = curve.discount(t);
    let mut add = |pay: f64, amount: f64| {
        let residual = pay - t;
        bands[rate_band(residual)] += amount * curve.discount(pay) / df_t * residual;
    };
    let mut first = true;
    for pay in s.payment_times() {
        if pay <= t + 1e-9 {
            continue;
        }
        if first {
            let start = pay - tau;
            let fixing = (curve.discount(start) / curve.discount(pay) - 1.0) / tau;
            add(pay, 1.0 + tau * fixing);
            first = false;
        }
        add(pay, -s.fixed_rate * tau);
    }
    if !first {
        add(s.maturity, -1.0);
    }
    bands
}

/// Annuity-weighted mean time to the remaining payments of a swap.
pub fn effective_maturity(s: &SwapSpec, curve: &DiscountCurve, t: f64) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for pay in s.payment_times().into_iter().filter(|p| *p > t + 1e-9) {
        let w = curve.discount(pay);
        num += w * (pay - t);
        den += w;
    }
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Parameters of the capital calculation.
#[derive(Debug, Clone, PartialEq)]
pub struct CapitalSettings {
    pub min_ratio: f64,
    /// CVA VAR horizon in years.
    pub horizon: f64,
    /// Seller of the credit protection. When set and better rated, the hedged
    /// CCR charge uses its weight.
    pub provider: Option<CounterpartyProfile>,
}

impl Default for CapitalSettings {
    fn default() -> Self {
        Self { min_ratio: 0.08, horizon: 1.0, provider: None }
    }
}

/// Capital requirement profile. `market_risk`, `ccr` and `cva_var` make up
/// `K^U`; `ccr_relief` and `cva_var_relief` make up `K^R`, the relief under a
/// full credit hedge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CapitalProfile {
    pub times: Vec<f64>,
    pub market_risk: Vec<f64>,
    pub ccr: Vec<f64>,
    pub cva_var: Vec<f64>,
    pub ccr_relief: Vec<f64>,
    pub cva_var_relief: Vec<f64>,
}

/// `K^U - psi K^R` split by component at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NetCapital {
    pub market_risk: f64,
    pub ccr: f64,
    pub cva_var: f64,
}

impl NetCapital {
    pub fn total(&self) -> f64 {
        self.market_risk + self.ccr + self.cva_var
    }
}

impl CapitalProfile {
    pub fn zero(times: Vec<f64>) -> Self {
        let z = vec![0.0; times.len()];
        Self {
            market_risk: z.clone(),
            ccr: z.clone(),
            cva_var: z.clone(),
            ccr_relief: z.clone(),
            cva_var_relief: z,
            times,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn unhedged(&self, k: usize) -> f64 {
        self.market_risk[k] + self.ccr[k] + self.cva_var[k]
    }

    pub fn relief(&self, k: usize) -> f64 {
        self.ccr_relief[k] + self.cva_var_relief[k]
    }

    pub fn net(&self, k: usize, hedge_fraction: f64) -> NetCapital {
        NetCapital {
            market_risk: self.market_risk[k],
            ccr: self.ccr[k] - hedge_fraction * self.ccr_relief[k],
            cva_var: self.cva_var[k] - hedge_fraction * self.cva_var_relief[k],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.times.len();
        let cols = [&self.market_risk, &self.ccr, &self.cva_var, &self.ccr_relief, &self.cva_var_relief];
        if cols.iter().any(|c| c.len() != n) {
            return Err(Error::validation("capital columns must match the time grid"));
        }
        if cols.iter().any(|c| c.iter().any(|v| !(*v >= 0.0))) {
            return Err(Error::validation("capital components must be non-negative"));
        }
        if (0..n).any(|k| self.ccr_relief[k] > self.ccr[k] || self.cva_var_relief[k] > self.cva_var[k]) {
            return Err(Error::validation("capital relief exceeds the unhedged requirement"));
        }
        Ok(())
    }
}

/// Capital profile of a netting set with one counterparty.
///
/// `exposure` is the profile of the uncollateralized swaps. Collateralized
/// swaps attract market risk only. Market risk is unaffected by the credit
/// hedge; the hedge removes CVA VAR in full and, with a better-rated
/// provider, moves CCR onto the provider's weight.
pub fn capital_profile(
    exposure: &ExposureProfile,
    cpty: &CounterpartyProfile,
    swaps: &[SwapSpec],
    curve: &DiscountCurve,
    settings: &CapitalSettings,
) -> Result<CapitalProfile> {
    cpty.validate()?;
    if let Some(p) = &settings.provider {
        p.validate()?;
    }
    if !(settings.min_ratio >= 0.0) || !(settings.horizon >= 0.0) {
        return Err(Error::validation("capital ratio and horizon must be non-negative"));
    }
    let times = exposure.times.clone();
    let live: Vec<&SwapSpec> = swaps.iter().filter(|s| !s.collateralized).collect();
    let horizon = live.iter().map(|s| s.maturity).fold(0.0, f64::max);
    if live.is_empty() && exposure.epe_undiscounted.iter().any(|v| *v != 0.0) {
        return Err(Error::validation("exposure given for a fully collateralized netting set"));
    }
    if !live.is_empty() && (times.last().copied().unwrap_or(0.0) - horizon).abs() > 1e-9 {
        return Err(Error::validation("exposure grid must end at the longest uncollateralized maturity"));
    }
    let hedged_weight = settings
        .provider
        .as_ref()
        .map_or(cpty.risk_weight, |p| p.risk_weight.min(cpty.risk_weight));

    let mut out = CapitalProfile::zero(times.clone());
    for (k, &t) in times.iter().enumerate() {
        out.market_risk[k] = market_risk_capital(&swap_rate_sensitivities(swaps, curve, t));
        let (mut add_on, mut notional, mut m_weighted) = (0.0, 0.0, 0.0);
        for s in live.iter().filter(|s| s.maturity > t + 1e-9) {
            add_on += s.notional * cem_add_on(s.maturity - t);
            notional += s.notional;
            m_weighted += s.notional * effective_maturity(s, curve, t);
        }
        if notional == 0.0 {
            continue;
        }
        let ead = exposure.epe_undiscounted[k].max(0.0) + add_on;
        let m = m_weighted / notional;
        out.ccr[k] = ccr_capital(ead, cpty.risk_weight, settings.min_ratio);
        out.ccr_relief[k] = out.ccr[k] - ccr_capital(ead, hedged_weight, settings.min_ratio);
        out.cva_var[k] = cva_var_capital(ead * cva_ead_discount(m), cpty.cva_weight, m, 0.0, 0.0, settings.horizon);
        // a full hedge with matching maturity offsets the whole charge
        out.cva_var_relief[k] = out.cva_var[k];
    }
    out.validate()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exposure::SwapSide;
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12 * b.abs().max(1.0)
    }

    #[test]
    fn cem_examples() {
        assert!(close(ead_cem(-5.0, 100.0, 10.0).unwrap(), 1.5));
        assert!(close(ead_cem(2.0, 100.0, 3.0).unwrap(), 2.5));
        assert_eq!(ead_cem(0.0, 100.0, 0.5).unwrap(), 0.0);
        assert!(ead_cem(1.0, -1.0, 2.0).is_err());
        assert_eq!(cem_add_on(1.0), 0.0);
        assert_eq!(cem_add_on(5.0), 0.005);
    }

    #[test]
    fn ccr_examples() {
        assert!(close(ccr_capital(100.0, 0.2, 0.08), 1.6));
        assert_eq!(ccr_capital(0.0, 0.2, 0.08), 0.0);
        assert!(close(ccr_capital(100.0, 1.5, 0.08), 12.0));
    }

    #[test]
    fn cva_var_examples() {
        assert!(close(cva_var_capital(100.0, 0.008, 5.0, 0.0, 0.0, 1.0), 9.32));
        assert_eq!(cva_var_capital(100.0, 0.008, 5.0, 250.0, 2.0, 1.0), 0.0);
        assert_eq!(cva_var_capital(100.0, 0.0, 5.0, 0.0, 0.0, 1.0), 0.0);
    }

    #[test]
    fn builtin_table() {
        let t = builtin_ratings();
        assert_eq!(t.len(), 4);
        let bb = builtin_rating("BB").unwrap();
        assert_eq!((bb.cds_spread_bp, bb.risk_weight, bb.cva_weight), (250.0, 1.0, 0.02));
        assert!((bb.hazard().unwrap() - 0.041_666_666_666_666_664).abs() < 1e-15);
        assert!(builtin_rating("B").is_none());
    }

    #[test]
    fn cva_ead_discount_limits() {
        assert_eq!(cva_ead_discount(0.0), 1.0);
        assert!(close(cva_ead_discount(5.0), (1.0 - (-0.25f64).exp()) / 0.25));
        assert!(cva_ead_discount(10.0) < cva_ead_discount(1.0));
    }

    #[test]
    fn bands_follow_duration_table() {
        assert_eq!(rate_band(0.05), 0);
        assert_eq!(rate_band(1.0), 3);
        assert_eq!(rate_band(3.0), 6);
        assert_eq!(rate_band(10.0), 11);
        assert_eq!(rate_band(30.0), 14);
    }

    #[test]
    fn market_risk_offsetting() {
        let mut net = [0.0; RATE_BANDS];
        assert_eq!(market_risk_capital(&net), 0.0);
        // single long position in the 5.7 to 7.3y band: 0.65% of it
        net[9] = 1000.0;
        assert!(close(market_risk_capital(&net), 6.5));
        // long and short in the same zone: 30% of the matched part plus the rest
        net[8] = -500.0;
        let w10 = 1000.0 * 0.0065;
        let w8 = 500.0 * 0.007;
        assert!(close(market_risk_capital(&net), 0.3 * w8 + (w10 - w8)));
        // opposite positions in zones 1 and 3 offset at 100%
        let mut outer = [0.0; RATE_BANDS];
        outer[0] = 100.0;
        outer[14] = -100.0 / 0.6;
        assert!(close(market_risk_capital(&outer), 1.0));
    }

    fn swap(side: SwapSide, collateralized: bool) -> SwapSpec {
        SwapSpec { notional: 1e6, fixed_rate: 0.027, maturity: 10.0, frequency: 2, side, collateralized }
    }

    #[test]
    fn back_to_back_has_no_market_risk() {
        let curve = DiscountCurve::new(vec![1.0, 10.0], vec![0.015, 0.025]).unwrap();
        let pair = [swap(SwapSide::Pay, false), swap(SwapSide::Receive, true)];
        for t in [0.0, 0.25, 3.3, 9.5, 10.0] {
            assert_eq!(market_risk_capital(&swap_rate_sensitivities(&pair, &curve, t)), 0.0);
        }
        let single = swap_rate_sensitivities(&pair[..1], &curve, 0.0);
        assert!(market_risk_capital(&single) > 0.0);
    }

    #[test]
    fn effective_maturity_of_bullet() {
        let curve = DiscountCurve::flat(0.0);
        let s = SwapSpec { frequency: 1, maturity: 3.0, ..swap(SwapSide::Pay, false) };
        assert!(close(effective_maturity(&s, &curve, 0.0), 2.0));
        assert!(close(effective_maturity(&s, &curve, 2.5), 0.5));
        assert_eq!(effective_maturity(&s, &curve, 3.0), 0.0);
    }

    fn flat_exposure(times: Vec<f64>, level: f64) -> ExposureProfile {
        let n = times.len();
        let mut epe = vec![level; n];
        epe[n - 1] = 0.0;
        ExposureProfile::deterministic(times, epe.clone(), vec![0.0; n], epe).unwrap()
    }

    #[test]
    fn capital_profile_components() {
        let curve = DiscountCurve::flat(0.02);
        let pair = [swap(SwapSide::Pay, false), swap(SwapSide::Receive, true)];
        let times: Vec<f64> = (0..=40).map(|k| k as f64 * 0.25).collect();
        let exp = flat_exposure(times.clone(), 2e4);
        let cpty = builtin_rating("BB").unwrap();
        let cap = capital_profile(&exp, &cpty, &pair, &curve, &CapitalSettings::default()).unwrap();
        // at time 0: EAD = 2e4 + 1.5% of notional
        let ead = 2e4 + 1.5e4;
        assert!(close(cap.ccr[0], ead * 1.0 * 0.08));
        let m = effective_maturity(&pair[0], &curve, 0.0);
        assert!(close(cap.cva_var[0], 2.33 * 0.02 * m * ead * (1.0 - (-0.05 * m).exp()) / (0.05 * m)));
        assert!(cap.market_risk.iter().all(|v| *v == 0.0));
        // default settings keep the counterparty weight under the hedge
        assert!(cap.ccr_relief.iter().all(|v| *v == 0.0));
        for k in 0..cap.len() {
            assert_eq!(cap.net(k, 1.0).cva_var, 0.0);
            assert_eq!(cap.net(k, 0.0).total(), cap.unhedged(k));
        }
        let last = cap.len() - 1;
        assert_eq!(cap.unhedged(last), 0.0);

        let with_a = CapitalSettings { provider: builtin_rating("A"), ..CapitalSettings::default() };
        let hedged = capital_profile(&exp, &cpty, &pair, &curve, &with_a).unwrap();
        assert!(close(hedged.net(0, 1.0).ccr, ead * 0.5 * 0.08));
        // a worse-rated provider gives no relief
        let worse = CapitalSettings { provider: builtin_rating("CCC"), ..CapitalSettings::default() };
        let h2 = capital_profile(&exp, &cpty, &pair, &curve, &worse).unwrap();
        assert!(h2.ccr_relief.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn zero_exposure_collateralized_set_has_no_capital() {
        let curve = DiscountCurve::flat(0.02);
        let times: Vec<f64> = (0..=40).map(|k| k as f64 * 0.25).collect();
        let exp = ExposureProfile::zero(times);
        let both = [swap(SwapSide::Pay, true), swap(SwapSide::Receive, true)];
        let cap = capital_profile(&exp, &builtin_rating("A").unwrap(), &both, &curve, &CapitalSettings::default()).unwrap();
        assert!((0..cap.len()).all(|k| cap.unhedged(k) == 0.0 && cap.relief(k) == 0.0));
    }

    #[test]
    fn unhedged_ccr_dominates_provider_substitution() {
        let curve = DiscountCurve::flat(0.02);
        let pair = [swap(SwapSide::Pay, false), swap(SwapSide::Receive, true)];
        let times: Vec<f64> = (0..=40).map(|k| k as f64 * 0.25).collect();
        let exp = flat_exposure(times, 1e4);
        let provider = CapitalSettings { provider: builtin_rating("AAA"), ..CapitalSettings::default() };
        for c in builtin_ratings() {
            let cap = capital_profile(&exp, &c, &pair, &curve, &provider).unwrap();
            for k in 0..cap.len() {
                assert!(cap.net(k, 0.0).ccr >= cap.net(k, 1.0).ccr);
            }
        }
    }

    proptest! {
        #[test]
        fn net_capital_affine_and_non_increasing_in_hedge(
            level in 0.0..1e5f64, psi in 0.0..1.0f64, scale in 0.1..10.0f64, idx in 0usize..4,
        ) {
            let curve = DiscountCurve::flat(0.02);
            let times: Vec<f64> = (0..=20).map(|k| k as f64 * 0.5).collect();
            let cpty = builtin_ratings()[idx].clone();
            let settings = CapitalSettings { provider: builtin_rating("AAA"), ..CapitalSettings::default() };
            let pair = [swap(SwapSide::Pay, false), swap(SwapSide::Receive, true)];
            let cap = capital_profile(&flat_exposure(times.clone(), level), &cpty, &pair, &curve, &settings).unwrap();
            for k in 0..cap.len() {
                let (n0, np, n1) = (cap.net(k, 0.0).total(), cap.net(k, psi).total(), cap.net(k, 1.0).total());
                prop_assert!(n1 <= np + 1e-9 && np <= n0 + 1e-9);
                prop_assert!((np - (n0 - psi * cap.relief(k))).abs() <= 1e-9 * n0.max(1.0));
                prop_assert!(cap.relief(k) <= cap.unhedged(k));
            }
            // positive homogeneity in notional
            let scaled: Vec<SwapSpec> = pair.iter().map(|s| SwapSpec { notional: s.notional * scale, ..*s }).collect();
            let cap2 = capital_profile(&flat_exposure(times, level * scale), &cpty, &scaled, &curve, &settings).unwrap();
            for k in 0..cap.len() {
                prop_assert!((cap2.unhedged(k) - scale * cap.unhedged(k)).abs() <= 1e-9 * cap2.unhedged(k).max(1.0));
            }
        }

        #[test]
        fn market_risk_homogeneous(pos in proptest::array::uniform15(-1e4..1e4f64), k in 0.0..5.0f64) {
            let scaled = pos.map(|p| p * k);
            let a = market_risk_capital(&pos);
            let b = market_risk_capital(&scaled);
            prop_assert!(a >= 0.0);
            prop_assert!((b - k * a).abs() <= 1e-9 * b.abs().max(1.0));
        }
    }
}
