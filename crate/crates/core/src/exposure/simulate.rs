use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::curve::DiscountCurve;
use super::model::ShortRateModel;
use crate::error::{Error, Result};

/// Paths per deterministic substream. Even, so antithetic pairs never straddle blocks.
pub const BLOCK_PATHS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct McSettings {
    pub paths: usize,
    pub seed: u64,
    #[serde(default = "default_antithetic")]
    pub antithetic: bool,
    /// Worker threads; `None` uses the global pool. Results do not depend on it.
    #[serde(default)]
    pub workers: Option<usize>,
}

fn default_antithetic() -> bool {
    true
}

impl McSettings {
    pub fn new(paths: usize, seed: u64) -> Self {
        Self { paths, seed, antithetic: true, workers: None }
    }

    /// Paths actually simulated (rounded up to even under antithetic sampling).
    pub fn effective_paths(&self) -> usize {
        if self.antithetic {
            self.paths + self.paths % 2
        } else {
            self.paths
        }
    }

    pub(crate) fn blocks(&self) -> usize {
        self.effective_paths().div_ceil(BLOCK_PATHS)
    }

    pub(crate) fn block_len(&self, block: usize) -> usize {
        let n = self.effective_paths();
        BLOCK_PATHS.min(n - block * BLOCK_PATHS)
    }
}

/// Exact transition of `(x, int x ds)` over one step.
#[derive(Debug, Clone, Copy)]
struct Step {
    decay: f64,
    b: f64,
    l11: f64,
    l21: f64,
    l22: f64,
}

impl Step {
    fn new(model: &ShortRateModel, dt: f64) -> Self {
        let a = model.mean_reversion;
        let s2 = model.volatility * model.volatility;
        let b = model.b(dt);
        let var_x = s2 * (-(-2.0 * a * dt).exp_m1() / (2.0 * a));
        let var_i = model.integrated_variance(dt);
        let cov = 0.5 * s2 * b * b;
        let l11 = var_x.sqrt();
        let l21 = if l11 > 0.0 { cov / l11 } else { 0.0 };
        let l22 = (var_i - l21 * l21).max(0.0).sqrt();
        Self { decay: (-a * dt).exp(), b, l11, l21, l22 }
    }
}

pub(crate) fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid[0] != 0.0 {
        return Err(Error::validation("simulation grid must start at 0"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::validation("simulation grid must be strictly increasing"));
    }
    Ok(())
}

/// Factor `x` and `int_0^t x ds` for every path of one block, row-major
/// `[path][grid]`.
pub(crate) struct BlockPaths {
    pub len: usize,
    pub factor: Vec<f64>,
    pub integral: Vec<f64>,
}

pub(crate) struct Simulator<'a> {
    grid: &'a [f64],
    steps: Vec<Step>,
    settings: McSettings,
}

impl<'a> Simulator<'a> {
    pub fn new(model: &ShortRateModel, grid: &'a [f64], settings: McSettings) -> Result<Self> {
        model.validate()?;
        validate_grid(grid)?;
        if settings.paths == 0 {
            return Err(Error::validation("path count must be at least 1"));
        }
        let steps = grid.windows(2).map(|w| Step::new(model, w[1] - w[0])).collect();
        Ok(Self { grid, steps, settings })
    }

    pub fn block(&self, block: usize) -> BlockPaths {
        let len = self.settings.block_len(block);
        let n = self.grid.len();
        let mut rng = ChaCha8Rng::seed_from_u64(self.settings.seed);
        rng.set_stream(block as u64);
        let mut factor = vec![0.0; len * n];
        let mut integral = vec![0.0; len * n];
        let mut normals = vec![0.0; 2 * self.steps.len()];
        let mut path = 0;
        while path < len {
            for z in normals.iter_mut() {
                *z = StandardNormal.sample(&mut rng);
            }
            let copies = if self.settings.antithetic { 2.min(len - path) } else { 1 };
            for c in 0..copies {
                let sign = if c == 0 { 1.0 } else { -1.0 };
                let row = (path + c) * n;
                let (mut x, mut acc) = (0.0, 0.0);
                for (k, st) in self.steps.iter().enumerate() {
                    let z1 = sign * normals[2 * k];
                    let z2 = sign * normals[2 * k + 1];
                    acc += st.b * x + st.l21 * z1 + st.l22 * z2;
                    x = st.decay * x + st.l11 * z1;
                    factor[row + k + 1] = x;
                    integral[row + k + 1] = acc;
                }
            }
            path += copies;
        }
        BlockPaths { len, factor, integral }
    }

    /// Runs `f` on every block and returns the results in block order.
    pub fn map_blocks<T, F>(&self, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize, BlockPaths) -> T + Sync + Send,
    {
        let n = self.settings.blocks();
        let job = |b: usize| f(b, self.block(b));
        match self.settings.workers {
            Some(1) => Ok((0..n).map(job).collect()),
            Some(w) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(w)
                    .build()
                    .map_err(|e| Error::validation(format!("worker pool: {e}")))?;
                Ok(pool.install(|| (0..n).into_par_iter().map(job).collect()))
            }
            None => Ok((0..n).into_par_iter().map(job).collect()),
        }
    }
}

/// Simulated short-rate paths with pathwise discount factors.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    grid: Vec<f64>,
    paths: usize,
    factor: Vec<f64>,
    short_rate: Vec<f64>,
    discount: Vec<f64>,
}

impl PathSet {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn path_count(&self) -> usize {
        self.paths
    }

    /// Gaussian factor `x(t)` along path `p`.
    pub fn factor(&self, p: usize) -> &[f64] {
        let n = self.grid.len();
        &self.factor[p * n..(p + 1) * n]
    }

    pub fn short_rate(&self, p: usize) -> &[f64] {
        let n = self.grid.len();
        &self.short_rate[p * n..(p + 1) * n]
    }

    /// `exp(-int_0^t r ds)` along path `p`.
    pub fn discount(&self, p: usize) -> &[f64] {
        let n = self.grid.len();
        &self.discount[p * n..(p + 1) * n]
    }
}

/// Pathwise discount factor from the factor integral.
#[inline]
pub(crate) fn pathwise_discount(shift_integral: f64, integral: f64) -> f64 {
    (-shift_integral - integral).exp()
}

pub fn simulate_paths(
    model: &ShortRateModel,
    curve: &DiscountCurve,
    grid: &[f64],
    settings: &McSettings,
) -> Result<PathSet> {
    let sim = Simulator::new(model, grid, *settings)?;
    let shifts: Vec<f64> = grid.iter().map(|&t| model.shift(curve, t)).collect();
    let shift_int: Vec<f64> = grid.iter().map(|&t| model.shift_integral(curve, 0.0, t)).collect();
    let blocks = sim.map_blocks(|_, b| b)?;
    let paths = settings.effective_paths();
    let n = grid.len();
    let mut factor = Vec::with_capacity(paths * n);
    let mut short_rate = Vec::with_capacity(paths * n);
    let mut discount = Vec::with_capacity(paths * n);
    for b in blocks {
        for p in 0..b.len {
            for k in 0..n {
                let x = b.factor[p * n + k];
                factor.push(x);
                short_rate.push(shifts[k] + x);
                discount.push(pathwise_discount(shift_int[k], b.integral[p * n + k]));
            }
        }
    }
    Ok(PathSet { grid: grid.to_vec(), paths, factor, short_rate, discount })
}
