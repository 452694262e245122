use proptest::prelude::*;
use xva_core::credit::{closeout_values, CloseOutState};
use xva_core::exposure::{exposure_grid, netting_set_profile, DiscountCurve, McSettings, ShortRateModel, SwapSide, SwapSpec};
use xva_core::pde::{replication_states, solve_vhat, verify_decomposition, Grid, Payoff, PdeProblem};
use xva_core::regcap::{builtin_ratings, capital_profile, CapitalSettings};

fn curve_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    prop::collection::vec((0.1..5.0f64, -0.01..0.08f64), 1..6).prop_map(|steps| {
        let mut t = 0.0;
        steps
            .into_iter()
            .map(|(dt, r)| {
                t += dt;
                (t, r)
            })
            .unzip()
    })
}

fn swap_strategy() -> impl Strategy<Value = SwapSpec> {
    (1e3..1e5f64, 0.0..0.06f64, 1u32..8, prop::sample::select(vec![1u32, 2, 4]), any::<bool>()).prop_map(
        |(notional, fixed_rate, years, frequency, pay)| SwapSpec {
            notional,
            fixed_rate,
            maturity: years as f64,
            frequency,
            side: if pay { SwapSide::Pay } else { SwapSide::Receive },
            collateralized: false,
        },
    )
}

proptest! {
    #[test]
    fn curve_is_unit_at_zero_positive_and_hits_pillars((pillars, rates) in curve_strategy(), probe in 0.0..40.0f64) {
        let curve = DiscountCurve::new(pillars.clone(), rates.clone()).unwrap();
        prop_assert_eq!(curve.discount(0.0), 1.0);
        prop_assert!(curve.discount(probe) > 0.0);
        for (t, r) in pillars.iter().zip(&rates) {
            prop_assert!((curve.zero_rate(*t) - r).abs() < 1e-14);
        }
    }

    #[test]
    fn issuer_closeout_dominates_when_recoveries_ordered(
        v in -1e5..1e5f64, gap in 0.0..1e5f64, rc in 0.0..1.0f64, extra in 0.0..1.0f64,
    ) {
        let rb = rc + (1.0 - rc) * extra;
        let out = closeout_values(&CloseOutState { value: v, collateral: v - gap, issuer_recovery: rb, counterparty_recovery: rc });
        prop_assert!(out.g_b >= out.g_c - 1e-9 * (1.0 + v.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn exposure_signs_and_maturity(swap in swap_strategy(), vol in 0.0..0.02f64, seed in any::<u64>()) {
        let curve = DiscountCurve::flat(0.02);
        let model = ShortRateModel::new(0.05, vol).unwrap();
        let grid = exposure_grid(&[swap], 0.5);
        let p = netting_set_profile(&[swap], &model, &curve, &grid, &McSettings::new(512, seed)).unwrap();
        for k in 0..p.len() {
            prop_assert!(p.epe[k] >= 0.0 && p.ene[k] <= 0.0);
            prop_assert!(p.epe_se[k] >= 0.0 && p.ene_se[k] >= 0.0);
        }
        let last = p.len() - 1;
        prop_assert_eq!(p.times[last], swap.maturity);
        prop_assert_eq!(p.epe[last], 0.0);
        prop_assert_eq!(p.ene[last], 0.0);
    }

    #[test]
    fn capital_components_nonnegative_and_relief_bounded(swap in swap_strategy(), rating in 0usize..4, provider in 0usize..5) {
        let curve = DiscountCurve::flat(0.02);
        let grid = exposure_grid(&[swap], 0.25);
        let p = netting_set_profile(&[swap], &ShortRateModel::default(), &curve, &grid, &McSettings::new(256, 3)).unwrap();
        let table = builtin_ratings();
        let settings = CapitalSettings { provider: table.get(provider).cloned(), ..CapitalSettings::default() };
        let k = capital_profile(&p, &table[rating], &[swap], &curve, &settings).unwrap();
        for i in 0..k.times.len() {
            for v in [k.market_risk[i], k.ccr[i], k.cva_var[i], k.ccr_relief[i], k.cva_var_relief[i]] {
                prop_assert!(v >= 0.0);
            }
            prop_assert!(k.ccr_relief[i] <= k.ccr[i]);
            // a fully eligible hedge removes the CVA VAR charge
            prop_assert_eq!(k.cva_var_relief[i], k.cva_var[i]);
        }
    }
}

fn problem_strategy() -> impl Strategy<Value = PdeProblem> {
    (
        (0.15..0.4f64, 0.0..0.05f64, 0.005..0.05f64, 0.01..0.08f64, 0.0..1.0f64, -1.0..0.8f64),
        (0.0..1.0f64, 0.0..0.35f64, 0.0..0.5f64, 80.0..120.0f64, 0usize..3, 1.0..5.0f64),
    )
        .prop_map(|((vol, rate, lb, lc, psi, xi), (phi, tax, c, strike, kind, maturity))| PdeProblem {
            volatility: vol,
            rate,
            repo_rate: rate,
            issuer_hazard: lb,
            counterparty_hazard: lc,
            hedge_fraction: psi,
            price_of_risk: xi,
            capital_funding: phi,
            tax_rate: tax,
            collateral_fraction: c,
            payoff: match kind {
                0 => Payoff::Call { strike },
                1 => Payoff::Put { strike },
                _ => Payoff::Forward { strike },
            },
            maturity,
            ..PdeProblem::example()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn pde_matches_quadrature_on_random_problems(problem in problem_strategy()) {
        let report = verify_decomposition(&problem, &Grid::new(201, 200), 1e-2).unwrap();
        prop_assert!(report.total.passed, "{:?}", report.total);
    }

    #[test]
    fn funding_condition_holds_everywhere(problem in problem_strategy()) {
        let solution = solve_vhat(&problem, &Grid::new(81, 40)).unwrap();
        for level in 0..solution.times.len() {
            for st in replication_states(&problem, &solution, level).unwrap() {
                prop_assert!(st.funding_residual.abs() <= 1e-10 * (1.0 + st.adjusted_value.abs()));
            }
        }
    }
}
