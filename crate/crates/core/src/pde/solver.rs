use serde::{Deserialize, Serialize};

use super::problem::{Component, ComponentSources, PdeProblem};
use crate::error::{Error, Result};

/// Finite-difference grid: uniform in `ln S` around the spot, which sits on
/// the middle node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Grid {
    /// Number of asset nodes; rounded up to odd so the spot is a node.
    pub space_nodes: usize,
    pub time_steps: usize,
    /// Half-width of the log-asset domain in terminal standard deviations.
    #[serde(default = "default_width")]
    pub width_sd: f64,
    /// Leading Crank-Nicolson steps replaced by two implicit half steps each.
    #[serde(default = "default_rannacher")]
    pub rannacher_steps: usize,
}

fn default_width() -> f64 {
    5.0
}

fn default_rannacher() -> usize {
    2
}

impl Grid {
    pub fn new(space_nodes: usize, time_steps: usize) -> Self {
        Self { space_nodes, time_steps, width_sd: default_width(), rannacher_steps: default_rannacher() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.space_nodes < 5 {
            return Err(Error::validation("grid needs at least 5 asset nodes"));
        }
        if self.time_steps < 1 {
            return Err(Error::validation("grid needs at least one time step"));
        }
        if !(self.width_sd > 0.0) || !self.width_sd.is_finite() {
            return Err(Error::validation("grid width must be positive"));
        }
        if self.rannacher_steps > self.time_steps {
            return Err(Error::validation("more smoothing steps than time steps"));
        }
        Ok(())
    }

    pub fn nodes(&self) -> usize {
        self.space_nodes | 1
    }

    /// Grid with half the resolution in both directions; node spacing doubles exactly.
    pub fn coarsened(&self) -> Self {
        Self { space_nodes: (self.nodes() - 1) / 2 + 1, time_steps: (self.time_steps / 2).max(1), ..*self }
    }
}

/// Log-spaced asset nodes and the time levels visited when marching from
/// maturity back to 0.
#[derive(Debug, Clone)]
pub(crate) struct Mesh {
    pub spots: Vec<f64>,
    pub centre: usize,
    pub dx: f64,
    /// Times to maturity of the stored levels, ascending from 0.
    pub taus: Vec<f64>,
    /// Whether the step ending at level `i + 1` is an implicit half step.
    pub implicit: Vec<bool>,
}

impl Mesh {
    pub fn new(problem: &PdeProblem, grid: &Grid) -> Self {
        let n = grid.nodes();
        let centre = n / 2;
        let half_width = grid.width_sd * problem.volatility * problem.maturity.sqrt();
        let dx = half_width / centre as f64;
        let x0 = problem.spot.ln();
        let spots = (0..n)
            .map(|j| if j == centre { problem.spot } else { (x0 + (j as f64 - centre as f64) * dx).exp() })
            .collect();
        let dt = problem.maturity / grid.time_steps as f64;
        let mut taus = vec![0.0];
        let mut implicit = Vec::new();
        for step in 0..grid.time_steps {
            let start = step as f64 * dt;
            if step < grid.rannacher_steps {
                taus.push(start + 0.5 * dt);
                implicit.push(true);
                implicit.push(true);
            } else {
                implicit.push(false);
            }
            taus.push(if step + 1 == grid.time_steps { problem.maturity } else { start + dt });
        }
        Self { spots, centre, dx, taus, implicit }
    }
}

/// Tridiagonal system with constant bands; the first and last rows carry the
/// boundary extrapolation.
#[derive(Debug, Clone)]
struct Operator {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
}

impl Operator {
    /// Discrete `L u = 0.5 sigma^2 u_xx + mu u_x - k u` on interior nodes, with
    /// `u` linear in `S` beyond the first and last interior node.
    fn new(problem: &PdeProblem, mesh: &Mesh, k: f64) -> Self {
        let n = mesh.spots.len() - 2;
        let h = mesh.dx;
        let s2 = problem.volatility * problem.volatility;
        let mu = problem.drift() - 0.5 * s2;
        let a = 0.5 * s2 / (h * h) - mu / (2.0 * h);
        let c = 0.5 * s2 / (h * h) + mu / (2.0 * h);
        let d = -s2 / (h * h) - k;
        let mut lower = vec![a; n];
        let mut diag = vec![d; n];
        let mut upper = vec![c; n];
        let s = &mesh.spots;
        let m = s.len();
        // u_0 = (1 - w0) u_1 + w0 u_2
        let w0 = (s[0] - s[1]) / (s[2] - s[1]);
        diag[0] += a * (1.0 - w0);
        upper[0] += a * w0;
        lower[0] = 0.0;
        // u_{m-1} = (1 + w1) u_{m-2} - w1 u_{m-3}
        let w1 = (s[m - 1] - s[m - 2]) / (s[m - 2] - s[m - 3]);
        diag[n - 1] += c * (1.0 + w1);
        lower[n - 1] -= c * w1;
        upper[n - 1] = 0.0;
        Self { lower, diag, upper }
    }

    fn apply(&self, u: &[f64], out: &mut [f64]) {
        let n = u.len();
        for i in 0..n {
            let mut v = self.diag[i] * u[i];
            if i > 0 {
                v += self.lower[i] * u[i - 1];
            }
            if i + 1 < n {
                v += self.upper[i] * u[i + 1];
            }
            out[i] = v;
        }
    }
}

/// Factorised `I - theta dt L`.
struct Implicit {
    lower: Vec<f64>,
    upper_mod: Vec<f64>,
    inv_pivot: Vec<f64>,
}

impl Implicit {
    fn new(op: &Operator, theta_dt: f64) -> Self {
        let n = op.diag.len();
        let lower: Vec<f64> = op.lower.iter().map(|v| -theta_dt * v).collect();
        let diag: Vec<f64> = op.diag.iter().map(|v| 1.0 - theta_dt * v).collect();
        let upper: Vec<f64> = op.upper.iter().map(|v| -theta_dt * v).collect();
        let mut upper_mod = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        let mut prev = 0.0;
        for i in 0..n {
            let pivot = diag[i] - if i > 0 { lower[i] * prev } else { 0.0 };
            inv_pivot[i] = 1.0 / pivot;
            upper_mod[i] = upper[i] * inv_pivot[i];
            prev = upper_mod[i];
        }
        Self { lower, upper_mod, inv_pivot }
    }

    fn solve(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        rhs[0] *= self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.upper_mod[i] * rhs[i + 1];
        }
    }
}

/// Marches `u_tau = L_k u + s(tau)` from `tau = 0` to maturity and returns
/// every level on the full node set. `source(level, out)` fills the source
/// on all nodes at the given level.
pub(crate) fn march(
    problem: &PdeProblem,
    mesh: &Mesh,
    k: f64,
    terminal: &[f64],
    mut source: impl FnMut(usize, &mut [f64]),
) -> Vec<Vec<f64>> {
    let m = mesh.spots.len();
    let n = m - 2;
    let op = Operator::new(problem, mesh, k);
    let mut cache: Vec<(f64, bool, Implicit)> = Vec::new();
    let mut levels = Vec::with_capacity(mesh.taus.len());
    levels.push(terminal.to_vec());
    let mut s_prev = vec![0.0; m];
    let mut s_next = vec![0.0; m];
    source(0, &mut s_prev);
    let mut u: Vec<f64> = terminal[1..m - 1].to_vec();
    let mut lu = vec![0.0; n];
    for (i, &imp) in mesh.implicit.iter().enumerate() {
        let dt = mesh.taus[i + 1] - mesh.taus[i];
        source(i + 1, &mut s_next);
        let theta = if imp { 1.0 } else { 0.5 };
        let idx = match cache.iter().position(|(d, t, _)| (*d - dt).abs() <= 1e-14 * dt && *t == imp) {
            Some(p) => p,
            None => {
                cache.push((dt, imp, Implicit::new(&op, theta * dt)));
                cache.len() - 1
            }
        };
        let mut rhs = u.clone();
        if imp {
            for j in 0..n {
                rhs[j] += dt * s_next[j + 1];
            }
        } else {
            op.apply(&u, &mut lu);
            for j in 0..n {
                rhs[j] += 0.5 * dt * lu[j] + 0.5 * dt * (s_prev[j + 1] + s_next[j + 1]);
            }
        }
        cache[idx].2.solve(&mut rhs);
        u = rhs;
        levels.push(extend(&u, &mesh.spots));
        std::mem::swap(&mut s_prev, &mut s_next);
    }
    levels
}

/// Adds the boundary nodes by linear extrapolation in `S`.
fn extend(interior: &[f64], spots: &[f64]) -> Vec<f64> {
    let m = spots.len();
    let mut full = Vec::with_capacity(m);
    let w0 = (spots[0] - spots[1]) / (spots[2] - spots[1]);
    full.push((1.0 - w0) * interior[0] + w0 * interior[1]);
    full.extend_from_slice(interior);
    let n = interior.len();
    let w1 = (spots[m - 1] - spots[m - 2]) / (spots[m - 2] - spots[m - 3]);
    full.push((1.0 + w1) * interior[n - 1] - w1 * interior[n - 2]);
    full
}

/// Value surfaces on the grid. Level `i` is time `times[i]`, ascending in
/// calendar time from 0 to maturity.
#[derive(Debug, Clone)]
pub struct PdeSolution {
    pub spots: Vec<f64>,
    pub times: Vec<f64>,
    /// Risk-free value from the same scheme.
    pub risk_free: Vec<Vec<f64>>,
    /// Value including every adjustment.
    pub adjusted: Vec<Vec<f64>>,
    pub spot_index: usize,
    pub diagnostics: Vec<String>,
}

impl PdeSolution {
    /// `U = V_hat - V` at time 0 and the spot.
    pub fn adjustment_at_spot(&self) -> f64 {
        self.adjusted[0][self.spot_index] - self.risk_free[0][self.spot_index]
    }

    pub fn adjustment(&self, level: usize, node: usize) -> f64 {
        self.adjusted[level][node] - self.risk_free[level][node]
    }

    /// CSV with columns `t,S,V_hat,U`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,S,V_hat,U\n");
        for (i, t) in self.times.iter().enumerate() {
            for (j, s) in self.spots.iter().enumerate() {
                out.push_str(&format!("{t},{s},{},{}\n", self.adjusted[i][j], self.adjustment(i, j)));
            }
        }
        out
    }
}

/// Warnings about grids too coarse for the payoff kink or the time horizon.
pub fn grid_diagnostics(problem: &PdeProblem, grid: &Grid) -> Vec<String> {
    let mut out = Vec::new();
    let sd = problem.volatility * problem.maturity.sqrt();
    let mesh_dx = grid.width_sd * sd / (grid.nodes() / 2) as f64;
    if mesh_dx > 0.05 * sd {
        out.push(format!(
            "grid too coarse to resolve the payoff kink: log-spacing {mesh_dx:.4} exceeds 5% of a terminal standard deviation ({sd:.4})"
        ));
    }
    if grid.time_steps < 20 {
        out.push(format!("only {} time steps; expect visible time discretisation error", grid.time_steps));
    }
    if grid.width_sd < 4.0 {
        out.push(format!("domain half-width of {} standard deviations truncates the density", grid.width_sd));
    }
    out
}

/// Risk-free surface and the surface with a given source and discount rate.
struct Surfaces {
    mesh: Mesh,
    risk_free: Vec<Vec<f64>>,
    /// Cell-averaged sources per level and node.
    sources: Vec<Vec<ComponentSources>>,
}

/// Sub-samples per cell when averaging sources.
const CELL_SAMPLES: usize = 16;

/// Average of the sources over each cell `[x_j - h/2, x_j + h/2]`, with the
/// risk-free value interpolated quadratically in `ln S`. The close-out terms
/// kink where the value changes sign; point samples there make the error
/// depend on where the kink falls between nodes.
fn cell_sources(problem: &PdeProblem, values: &[f64]) -> Vec<ComponentSources> {
    let m = values.len();
    (0..m)
        .map(|j| {
            if j == 0 || j + 1 == m {
                return problem.sources(values[j]);
            }
            let (a, b, c) = (values[j - 1], values[j], values[j + 1]);
            let slope = 0.5 * (c - a);
            let curve = 0.5 * (c - 2.0 * b + a);
            let mut acc = ComponentSources::default();
            for i in 0..CELL_SAMPLES {
                let eta = (i as f64 + 0.5) / CELL_SAMPLES as f64 - 0.5;
                let s = problem.sources(b + eta * slope + eta * eta * curve);
                acc.cva += s.cva;
                acc.dva += s.dva;
                acc.fca += s.fca;
                acc.colva += s.colva;
                acc.kva += s.kva;
                acc.tva += s.tva;
            }
            let w = 1.0 / CELL_SAMPLES as f64;
            ComponentSources {
                cva: acc.cva * w,
                dva: acc.dva * w,
                fca: acc.fca * w,
                colva: acc.colva * w,
                kva: acc.kva * w,
                tva: acc.tva * w,
            }
        })
        .collect()
}

impl Surfaces {
    fn new(problem: &PdeProblem, grid: &Grid) -> Self {
        let mesh = Mesh::new(problem, grid);
        let terminal: Vec<f64> = mesh.spots.iter().map(|&s| problem.payoff.value(s)).collect();
        let risk_free = march(problem, &mesh, problem.rate, &terminal, |_, out| out.fill(0.0));
        let sources = risk_free.iter().map(|level| cell_sources(problem, level)).collect();
        Self { mesh, risk_free, sources }
    }

    /// Marches the full adjusted value.
    fn adjusted(&self, problem: &PdeProblem) -> Vec<Vec<f64>> {
        let hazards = problem.issuer_hazard + problem.effective_hazard();
        march(problem, &self.mesh, problem.adjusted_rate(), &self.risk_free[0], |level, out| {
            for ((o, &v), s) in out.iter_mut().zip(&self.risk_free[level]).zip(&self.sources[level]) {
                *o = hazards * v - s.total();
            }
        })
    }

    /// Marches one component of the adjustment.
    fn component(&self, problem: &PdeProblem, c: Component) -> Vec<Vec<f64>> {
        let zero = vec![0.0; self.mesh.spots.len()];
        march(problem, &self.mesh, problem.adjusted_rate(), &zero, |level, out| {
            for (o, s) in out.iter_mut().zip(&self.sources[level]) {
                *o = -s.get(c);
            }
        })
    }

    fn solution(self, problem: &PdeProblem, grid: &Grid, adjusted: Vec<Vec<f64>>) -> PdeSolution {
        let t_end = problem.maturity;
        let times: Vec<f64> = self.mesh.taus.iter().rev().map(|tau| (t_end - tau).max(0.0)).collect();
        let mut risk_free = self.risk_free;
        risk_free.reverse();
        let mut adjusted = adjusted;
        adjusted.reverse();
        PdeSolution {
            spots: self.mesh.spots,
            times,
            risk_free,
            adjusted,
            spot_index: self.mesh.centre,
            diagnostics: grid_diagnostics(problem, grid),
        }
    }
}

/// Solves for the adjusted value with Crank-Nicolson in time (Rannacher
/// start) and central differences in `ln S`. The close-out, funding,
/// capital and tax sources are evaluated on the risk-free surface from the
/// same scheme.
pub fn solve_vhat(problem: &PdeProblem, grid: &Grid) -> Result<PdeSolution> {
    problem.validate()?;
    grid.validate()?;
    let surf = Surfaces::new(problem, grid);
    let adjusted = surf.adjusted(problem);
    Ok(surf.solution(problem, grid, adjusted))
}

/// Solves the adjustment PDE driven by one component's source only, which by
/// linearity gives that component's contribution to `U`.
pub fn solve_component(problem: &PdeProblem, grid: &Grid, component: Component) -> Result<PdeSolution> {
    problem.validate()?;
    grid.validate()?;
    let surf = Surfaces::new(problem, grid);
    let u = surf.component(problem, component);
    // report as an adjusted surface over the risk-free one
    let adjusted = u
        .iter()
        .zip(&surf.risk_free)
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
        .collect();
    Ok(surf.solution(problem, grid, adjusted))
}

/// `U` at time 0 and the spot from the full solve and from each component
/// solve, sharing one risk-free surface.
pub(crate) fn spot_adjustments(problem: &PdeProblem, grid: &Grid) -> Result<(f64, [f64; 6])> {
    problem.validate()?;
    grid.validate()?;
    let surf = Surfaces::new(problem, grid);
    let centre = surf.mesh.centre;
    let last = surf.mesh.taus.len() - 1;
    let total = surf.adjusted(problem)[last][centre] - surf.risk_free[last][centre];
    let mut parts = [0.0; 6];
    for (slot, c) in parts.iter_mut().zip(Component::ALL) {
        *slot = surf.component(problem, c)[last][centre];
    }
    Ok((total, parts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::problem::Payoff;

    fn plain_call() -> PdeProblem {
        PdeProblem {
            issuer_hazard: 0.0,
            counterparty_hazard: 0.0,
            tax_rate: 0.0,
            cost_of_capital: 0.0,
            collateral_spread: 0.0,
            capital_funding: 0.0,
            payoff: Payoff::Call { strike: 100.0 },
            maturity: 1.0,
            ..PdeProblem::example()
        }
    }

    #[test]
    fn no_adjustments_give_black_scholes() {
        let p = plain_call();
        let sol = solve_vhat(&p, &Grid::new(400, 400)).unwrap();
        let want = p.risk_free_value(0.0, p.spot);
        let got = sol.adjusted[0][sol.spot_index];
        assert!(((got - want) / want).abs() < 1e-4, "{got} {want}");
        assert_eq!(sol.adjustment_at_spot(), 0.0);
        assert_eq!(sol.times[0], 0.0);
        assert_eq!(*sol.times.last().unwrap(), p.maturity);
    }

    #[test]
    fn rannacher_levels() {
        let p = plain_call();
        let mesh = Mesh::new(&p, &Grid::new(11, 4));
        assert_eq!(mesh.taus, vec![0.0, 0.125, 0.25, 0.375, 0.5, 0.75, 1.0]);
        assert_eq!(mesh.implicit, vec![true, true, true, true, false, false]);
        assert_eq!(mesh.spots[mesh.centre], 100.0);
        assert_eq!(mesh.spots.len(), 11);
    }

    #[test]
    fn boundary_extrapolation_is_linear_in_spot() {
        let p = plain_call();
        let mesh = Mesh::new(&p, &Grid::new(41, 10));
        let lin: Vec<f64> = mesh.spots.iter().map(|s| 3.0 * s - 7.0).collect();
        let full = extend(&lin[1..lin.len() - 1], &mesh.spots);
        for (a, b) in full.iter().zip(&lin) {
            assert!((a - b).abs() < 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn linear_payoff_stays_nearly_linear() {
        // a function linear in S is a steady state of the continuous problem
        // with zero rate and carry; the scheme keeps it up to O(h^2)
        let mut p = plain_call();
        p.rate = 0.0;
        p.repo_rate = 0.0;
        p.dividend_yield = 0.0;
        let mesh = Mesh::new(&p, &Grid::new(201, 10));
        let lin: Vec<f64> = mesh.spots.iter().map(|s| 3.0 * s - 7.0).collect();
        let out = march(&p, &mesh, 0.0, &lin, |_, o| o.fill(0.0));
        for (a, b) in out.last().unwrap().iter().zip(&lin) {
            assert!((a - b).abs() < 1e-4 * b.abs().max(1.0), "{a} {b}");
        }
    }

    #[test]
    fn coarse_grid_is_flagged() {
        let p = plain_call();
        assert!(grid_diagnostics(&p, &Grid::new(401, 400)).is_empty());
        let d = grid_diagnostics(&p, &Grid::new(21, 400));
        assert!(d.iter().any(|m| m.contains("too coarse")));
    }

    #[test]
    fn full_hedge_without_tax_matches_untaxed_solution() {
        let mut p = PdeProblem::example();
        p.hedge_fraction = 1.0;
        p.capital_funding = 0.0;
        let taxed = solve_vhat(&p, &Grid::new(101, 100)).unwrap();
        p.tax_rate = 0.0;
        let untaxed = solve_vhat(&p, &Grid::new(101, 100)).unwrap();
        // tax on capital only: the difference is TVA, which is gamma_E times KVA
        let kva = solve_component(&p, &Grid::new(101, 100), Component::Kva).unwrap();
        let diff = taxed.adjustment_at_spot() - untaxed.adjustment_at_spot();
        assert!((diff - 0.21 * kva.adjustment_at_spot()).abs() < 1e-10);
    }

    #[test]
    fn higher_counterparty_hazard_never_raises_value() {
        let mut p = plain_call();
        p.counterparty_hazard = 0.02;
        p.hedge_fraction = 1.0;
        p.price_of_risk = 0.0;
        let g = Grid::new(201, 200);
        let low = solve_vhat(&p, &g).unwrap();
        p.counterparty_hazard = 0.06;
        let high = solve_vhat(&p, &g).unwrap();
        // boundary nodes are extrapolated, not solved, so only interior nodes count
        let m = low.spots.len();
        for (a, b) in high.adjusted.iter().zip(&low.adjusted) {
            for (x, y) in a[1..m - 1].iter().zip(&b[1..m - 1]) {
                assert!(*x <= *y + 1e-12);
            }
        }
    }
}
