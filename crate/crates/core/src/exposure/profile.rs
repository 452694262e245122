use serde::{Deserialize, Serialize};

use super::curve::DiscountCurve;
use super::model::ShortRateModel;
use super::simulate::{pathwise_discount, McSettings, Simulator};
use super::swap::{RateState, SwapSnapshot, SwapSpec, TIME_EPS};
use crate::credit::{neg, pos};
use crate::error::{Error, Result};

/// Monte Carlo exposure statistics on a time grid.
///
/// `epe` and `ene` are expectations of pathwise-discounted positive and
/// negative values; `epe_undiscounted` feeds regulatory EAD.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExposureProfile {
    pub times: Vec<f64>,
    pub epe: Vec<f64>,
    pub ene: Vec<f64>,
    pub discounted_mean: Vec<f64>,
    pub mean_value: Vec<f64>,
    pub epe_undiscounted: Vec<f64>,
    pub epe_se: Vec<f64>,
    pub ene_se: Vec<f64>,
    pub discounted_mean_se: Vec<f64>,
    pub mean_value_se: Vec<f64>,
    pub epe_undiscounted_se: Vec<f64>,
    pub path_count: usize,
    pub seed: u64,
}

impl ExposureProfile {
    pub fn zero(times: Vec<f64>) -> Self {
        let z = vec![0.0; times.len()];
        Self {
            epe: z.clone(),
            ene: z.clone(),
            discounted_mean: z.clone(),
            mean_value: z.clone(),
            epe_undiscounted: z.clone(),
            epe_se: z.clone(),
            ene_se: z.clone(),
            discounted_mean_se: z.clone(),
            mean_value_se: z.clone(),
            epe_undiscounted_se: z,
            times,
            path_count: 0,
            seed: 0,
        }
    }

    /// Profile with known expectations and no sampling error.
    pub fn deterministic(times: Vec<f64>, epe: Vec<f64>, ene: Vec<f64>, epe_undiscounted: Vec<f64>) -> Result<Self> {
        let n = times.len();
        if epe.len() != n || ene.len() != n || epe_undiscounted.len() != n {
            return Err(Error::validation("profile columns must match the time grid"));
        }
        let mut p = Self::zero(times);
        p.discounted_mean = epe.iter().zip(&ene).map(|(a, b)| a + b).collect();
        p.epe = epe;
        p.ene = ene;
        p.epe_undiscounted = epe_undiscounted;
        p.validate()?;
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.times.len();
        let cols = [
            &self.epe,
            &self.ene,
            &self.discounted_mean,
            &self.mean_value,
            &self.epe_undiscounted,
            &self.epe_se,
            &self.ene_se,
            &self.discounted_mean_se,
            &self.mean_value_se,
            &self.epe_undiscounted_se,
        ];
        if cols.iter().any(|c| c.len() != n) {
            return Err(Error::validation("profile columns must match the time grid"));
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::validation("profile times must be strictly increasing"));
        }
        if self.epe.iter().chain(&self.epe_undiscounted).any(|v| !(*v >= 0.0)) {
            return Err(Error::validation("positive exposure must be non-negative"));
        }
        if self.ene.iter().any(|v| !(*v <= 0.0)) {
            return Err(Error::validation("negative exposure must be non-positive"));
        }
        Ok(())
    }

    /// Shifts every exposure point by one standard error in the direction
    /// that increases its magnitude.
    pub fn bumped_by_standard_error(&self) -> Self {
        let mut p = self.clone();
        for k in 0..p.len() {
            p.epe[k] += p.epe_se[k];
            p.ene[k] -= p.ene_se[k];
            p.epe_undiscounted[k] += p.epe_undiscounted_se[k];
        }
        p
    }
}

/// Exposure grid: 0, every payment date, and a uniform `step` grid up to the
/// longest maturity.
pub fn exposure_grid(swaps: &[SwapSpec], step: f64) -> Vec<f64> {
    let horizon = swaps.iter().map(|s| s.maturity).fold(0.0, f64::max);
    let mut times = vec![0.0];
    if step > 0.0 {
        let n = (horizon / step + TIME_EPS).floor() as usize;
        times.extend((1..=n).map(|k| k as f64 * step));
    }
    for s in swaps {
        times.extend(s.payment_times());
    }
    times.push(horizon);
    times.sort_by(f64::total_cmp);
    times.dedup_by(|a, b| (*a - *b).abs() <= TIME_EPS);
    times
}

fn check_resets_on_grid(swaps: &[SwapSpec], grid: &[f64]) -> Result<()> {
    for s in swaps {
        s.validate()?;
        for t in std::iter::once(0.0).chain(s.payment_times()) {
            if t > grid[grid.len() - 1] + TIME_EPS {
                continue;
            }
            if !grid.iter().any(|g| (g - t).abs() <= TIME_EPS) {
                return Err(Error::validation(format!(
                    "exposure grid misses swap payment date {t}"
                )));
            }
        }
    }
    Ok(())
}

const STAT_COLS: usize = 5;
const DISC_POS: usize = 0;
const DISC_NEG: usize = 1;
const DISC_VALUE: usize = 2;
const VALUE: usize = 3;
const POS: usize = 4;

struct BlockStats {
    samples: usize,
    sum: Vec<[f64; STAT_COLS]>,
    sum_sq: Vec<[f64; STAT_COLS]>,
}

/// Pathwise portfolio values along one simulated block.
struct NettingEngine<'a> {
    swaps: &'a [SwapSpec],
    snapshots: Vec<Vec<SwapSnapshot>>,
    shift_int: Vec<f64>,
}

impl<'a> NettingEngine<'a> {
    fn new(swaps: &'a [SwapSpec], model: &ShortRateModel, curve: &DiscountCurve, grid: &[f64]) -> Result<Self> {
        check_resets_on_grid(swaps, grid)?;
        let snapshots = grid
            .iter()
            .map(|&t| {
                swaps
                    .iter()
                    .map(|s| SwapSnapshot::new(s, model, curve, t.min(s.maturity)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let shift_int = grid.iter().map(|&t| model.shift_integral(curve, 0.0, t)).collect();
        Ok(Self { swaps, snapshots, shift_int })
    }

    /// Calls `visit(k, discount, value)` for every grid point of one path.
    fn walk_path(&self, factor: &[f64], integral: &[f64], fixings: &mut [Option<f64>], mut visit: impl FnMut(usize, f64, f64)) {
        fixings.iter_mut().for_each(|f| *f = None);
        for (k, snaps) in self.snapshots.iter().enumerate() {
            let x = factor[k];
            let mut value = 0.0;
            for (j, snap) in snaps.iter().enumerate() {
                // value before rolling the fixing: a reset-date value does not use it
                value += snap
                    .value(&RateState { x, fixing: fixings[j] })
                    .expect("fixings tracked on every reset date");
                if let Some(f) = snap.new_fixing(x) {
                    fixings[j] = Some(f);
                }
            }
            visit(k, pathwise_discount(self.shift_int[k], integral[k]), value);
        }
    }
}

/// Exposure profile of a netting set of swaps with one counterparty.
///
/// Collateralized swaps carry no exposure and are skipped; a set made only of
/// collateralized swaps yields the all-zero profile.
pub fn netting_set_profile(
    swaps: &[SwapSpec],
    model: &ShortRateModel,
    curve: &DiscountCurve,
    grid: &[f64],
    settings: &McSettings,
) -> Result<ExposureProfile> {
    let live: Vec<SwapSpec> = swaps.iter().copied().filter(|s| !s.collateralized).collect();
    let sim = Simulator::new(model, grid, *settings)?;
    check_resets_on_grid(swaps, grid)?;
    if live.is_empty() {
        let mut p = ExposureProfile::zero(grid.to_vec());
        p.path_count = settings.effective_paths();
        p.seed = settings.seed;
        return Ok(p);
    }
    let engine = NettingEngine::new(&live, model, curve, grid)?;
    let n = grid.len();
    let antithetic = settings.antithetic;
    let blocks = sim.map_blocks(|_, b| {
        let mut fixings = vec![None; engine.swaps.len()];
        let mut stats = BlockStats { samples: 0, sum: vec![[0.0; STAT_COLS]; n], sum_sq: vec![[0.0; STAT_COLS]; n] };
        let mut row = vec![[0.0; STAT_COLS]; n];
        let group = if antithetic { 2 } else { 1 };
        let mut p = 0;
        while p < b.len {
            row.iter_mut().for_each(|r| *r = [0.0; STAT_COLS]);
            for q in p..p + group {
                let range = q * n..(q + 1) * n;
                engine.walk_path(&b.factor[range.clone()], &b.integral[range], &mut fixings, |k, d, v| {
                    let dv = d * v;
                    let r = &mut row[k];
                    r[DISC_POS] += pos(dv);
                    r[DISC_NEG] += neg(dv);
                    r[DISC_VALUE] += dv;
                    r[VALUE] += v;
                    r[POS] += pos(v);
                });
            }
            for (k, r) in row.iter().enumerate() {
                for (c, &total) in r.iter().enumerate().take(STAT_COLS) {
                    let s = total / group as f64;
                    stats.sum[k][c] += s;
                    stats.sum_sq[k][c] += s * s;
                }
            }
            stats.samples += 1;
            p += group;
        }
        stats
    })?;

    let mut samples = 0usize;
    let mut sum = vec![[0.0; STAT_COLS]; n];
    let mut sum_sq = vec![[0.0; STAT_COLS]; n];
    for b in &blocks {
        samples += b.samples;
        for k in 0..n {
            for c in 0..STAT_COLS {
                sum[k][c] += b.sum[k][c];
                sum_sq[k][c] += b.sum_sq[k][c];
            }
        }
    }
    let m = samples as f64;
    let col = |c: usize| -> (Vec<f64>, Vec<f64>) {
        (0..n)
            .map(|k| {
                let mean = sum[k][c] / m;
                let se = if samples > 1 {
                    ((sum_sq[k][c] / m - mean * mean).max(0.0) / (m - 1.0)).sqrt()
                } else {
                    0.0
                };
                (mean, se)
            })
            .unzip()
    };
    let (epe, epe_se) = col(DISC_POS);
    let (ene, ene_se) = col(DISC_NEG);
    let (discounted_mean, discounted_mean_se) = col(DISC_VALUE);
    let (mean_value, mean_value_se) = col(VALUE);
    let (epe_undiscounted, epe_undiscounted_se) = col(POS);
    Ok(ExposureProfile {
        times: grid.to_vec(),
        epe,
        ene,
        discounted_mean,
        mean_value,
        epe_undiscounted,
        epe_se,
        ene_se,
        discounted_mean_se,
        mean_value_se,
        epe_undiscounted_se,
        path_count: settings.effective_paths(),
        seed: settings.seed,
    })
}

/// Exposure profile of a single swap.
pub fn exposure_profile(
    spec: &SwapSpec,
    model: &ShortRateModel,
    curve: &DiscountCurve,
    grid: &[f64],
    settings: &McSettings,
) -> Result<ExposureProfile> {
    netting_set_profile(std::slice::from_ref(spec), model, curve, grid, settings)
}

/// Discounted expected value of the collateralized swaps, i.e. the expected
/// collateral balance held against them.
pub fn collateral_profile(
    swaps: &[SwapSpec],
    model: &ShortRateModel,
    curve: &DiscountCurve,
    grid: &[f64],
    settings: &McSettings,
) -> Result<Vec<f64>> {
    let secured: Vec<SwapSpec> = swaps
        .iter()
        .filter(|s| s.collateralized)
        .map(|s| SwapSpec { collateralized: false, ..*s })
        .collect();
    if secured.is_empty() {
        return Ok(vec![0.0; grid.len()]);
    }
    Ok(netting_set_profile(&secured, model, curve, grid, settings)?.discounted_mean)
}
