use rayon::prelude::*;
use serde::Serialize;
use xva_core::credit::{CreditCurve, HedgePolicy, TaxPolicy};
use xva_core::exposure::{collateral_profile, exposure_grid, netting_set_profile, ExposureProfile};
use xva_core::regcap::{capital_profile, CapitalProfile, CapitalSettings, CounterpartyProfile};
use xva_core::xva::{XvaComponents, XvaEngine, XvaInputs};

use crate::config::{Resolved, SCHEMA_VERSION};
use crate::error::CliError;

/// One line of the breakdown table. Adjustments are unrounded.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportRow {
    pub source: String,
    pub hedge_fraction: f64,
    pub price_of_risk: f64,
    /// `xi * lambda_C`, per year.
    pub m_lambda: f64,
    pub capital_funding: f64,
    pub rating: String,
    pub bps: XvaComponents,
    pub currency: XvaComponents,
    /// Change in each component when the exposure moves by one Monte Carlo standard error.
    pub standard_error_bps: XvaComponents,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunReport {
    pub schema_version: u32,
    pub seed: u64,
    pub paths: usize,
    pub antithetic: bool,
    /// Notional behind the bps figures.
    pub notional: f64,
    pub rows: Vec<ReportRow>,
}

struct RatingData {
    profile: CounterpartyProfile,
    curve: CreditCurve,
    hazard: f64,
    capital: CapitalProfile,
    capital_bumped: CapitalProfile,
}

/// Sweep point; rows come out in this order whatever order they finish in.
struct Task {
    psi: f64,
    xi_index: usize,
    phi: f64,
    rating: usize,
}

pub fn run(resolved: &Resolved) -> Result<RunReport, CliError> {
    let cfg = &resolved.config;
    let swaps = &cfg.swaps;
    let grid = exposure_grid(swaps, cfg.grid_step);
    let exposure = netting_set_profile(swaps, &resolved.model, &resolved.curve, &grid, &resolved.mc)?;
    let bumped = exposure.bumped_by_standard_error();
    let collateral = if cfg.collateral_spread_bp != 0.0 {
        collateral_profile(swaps, &resolved.model, &resolved.curve, &grid, &resolved.mc)?
    } else {
        vec![0.0; grid.len()]
    };
    let issuer = CreditCurve::from_spread(cfg.issuer.spread_bp * 1e-4, cfg.issuer.recovery)?;
    let settings = CapitalSettings {
        min_ratio: cfg.min_capital_ratio,
        horizon: cfg.cva_var_horizon,
        provider: cfg.ccr_provider_rating.as_deref().and_then(|r| cfg.rating(r)),
    };
    let tax = TaxPolicy {
        rate: cfg.tax_rate,
        tax_own_default_accruals: cfg.tax_own_default_accruals,
        tax_compensator: cfg.tax_compensator,
    };
    let ratings = cfg
        .ratings
        .iter()
        .map(|label| {
            let profile = cfg.rating(label).expect("validated rating");
            let curve = CreditCurve::from_spread(profile.spread(), profile.recovery)?;
            let hazard = profile.hazard()?;
            let capital = capital_profile(&exposure, &profile, swaps, &resolved.curve, &settings)?;
            let capital_bumped = capital_profile(&bumped, &profile, swaps, &resolved.curve, &settings)?;
            Ok(RatingData { profile, curve, hazard, capital, capital_bumped })
        })
        .collect::<Result<Vec<_>, xva_core::Error>>()?;

    let mut tasks = Vec::new();
    for &psi in &cfg.hedge_fraction {
        for xi_index in 0..cfg.price_of_risk_len() {
            for &phi in &cfg.capital_funding {
                for rating in 0..ratings.len() {
                    tasks.push(Task { psi, xi_index, phi, rating });
                }
            }
        }
    }

    let notional = cfg.bps_notional();
    let source = cfg.source();
    let threshold = cfg.tolerances.max_standard_error_bps;
    let rows = tasks
        .par_iter()
        .map(|t| -> Result<ReportRow, CliError> {
            let r = &ratings[t.rating];
            let xi = cfg.price_of_risk_for(r.hazard)[t.xi_index];
            let hedge = HedgePolicy::new(t.psi, xi, t.phi)?;
            let inputs = |exposure: &ExposureProfile, capital: &CapitalProfile| XvaInputs {
                exposure: exposure.clone(),
                capital: capital.clone(),
                issuer: issuer.clone(),
                counterparty: r.curve.clone(),
                hedge,
                tax,
                cost_of_capital: cfg.cost_of_capital,
                collateral_spread: cfg.collateral_spread_bp * 1e-4,
                collateral: collateral.clone(),
                discount: resolved.curve.clone(),
                notional,
            };
            let base_inputs = inputs(&exposure, &r.capital);
            let base = XvaEngine::new(&base_inputs)?.breakdown();
            let bumped_inputs = inputs(&bumped, &r.capital_bumped);
            let shifted = XvaEngine::new(&bumped_inputs)?.breakdown();
            let se = abs_difference(&shifted.bps, &base.bps);
            Ok(ReportRow {
                source: source.clone(),
                hedge_fraction: t.psi,
                price_of_risk: xi,
                m_lambda: hedge.market_price_of_risk(r.hazard),
                capital_funding: t.phi,
                rating: r.profile.rating.clone(),
                bps: normalized(base.bps),
                currency: normalized(base.currency),
                warning: standard_error_warning(&se, threshold),
                standard_error_bps: se,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(RunReport {
        schema_version: SCHEMA_VERSION,
        seed: resolved.mc.seed,
        paths: exposure.path_count,
        antithetic: resolved.mc.antithetic,
        notional,
        rows,
    })
}

fn fields(c: &XvaComponents) -> [f64; 9] {
    [c.cva, c.dva, c.fca, c.colva, c.kva_mr, c.kva_ccr, c.kva_cva_var, c.tva, c.total]
}

fn from_fields(f: [f64; 9]) -> XvaComponents {
    XvaComponents {
        cva: f[0],
        dva: f[1],
        fca: f[2],
        colva: f[3],
        kva_mr: f[4],
        kva_ccr: f[5],
        kva_cva_var: f[6],
        tva: f[7],
        total: f[8],
    }
}

/// Turns `-0.0` into `0.0` so outputs never show a signed zero.
fn normalized(c: XvaComponents) -> XvaComponents {
    from_fields(fields(&c).map(|v| v + 0.0))
}

fn abs_difference(a: &XvaComponents, b: &XvaComponents) -> XvaComponents {
    let (a, b) = (fields(a), fields(b));
    from_fields(std::array::from_fn(|i| (a[i] - b[i]).abs()))
}

const LABELS: [&str; 9] = ["CVA", "DVA", "FCA", "COLVA", "KVA_MR", "KVA_CCR", "KVA_CVA", "TVA", "Total"];

fn standard_error_warning(se: &XvaComponents, threshold: f64) -> Option<String> {
    let f = fields(se);
    let (i, worst) = f.iter().enumerate().fold((0, 0.0), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    (worst > threshold).then(|| format!("{} standard error {worst:.3}bp above {threshold}bp", LABELS[i]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_zero_is_cleared() {
        let c = normalized(XvaComponents { kva_mr: -0.0, ..XvaComponents::default() });
        assert!(c.kva_mr.is_sign_positive());
    }

    #[test]
    fn warning_names_worst_component() {
        let se = XvaComponents { dva: 0.2, tva: 1.5, total: 1.2, ..XvaComponents::default() };
        let w = standard_error_warning(&se, 1.0).unwrap();
        assert!(w.starts_with("TVA"), "{w}");
        assert!(standard_error_warning(&se, 2.0).is_none());
    }
}
