use serde::{Deserialize, Serialize};

use super::problem::{Component, ComponentSources, PdeProblem};
use crate::error::Result;
use crate::quadrature::GaussLegendre;

/// Adjustment components at time 0 and the spot.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Decomposition {
    pub cva: f64,
    pub dva: f64,
    pub fca: f64,
    pub colva: f64,
    pub kva: f64,
    pub tva: f64,
}

impl Decomposition {
    pub fn total(&self) -> f64 {
        self.cva + self.dva + self.fca + self.colva + self.kva + self.tva
    }

    pub fn get(&self, c: Component) -> f64 {
        match c {
            Component::Cva => self.cva,
            Component::Dva => self.dva,
            Component::Fca => self.fca,
            Component::Colva => self.colva,
            Component::Kva => self.kva,
            Component::Tva => self.tva,
        }
    }

    fn as_sources(&self) -> ComponentSources {
        ComponentSources {
            cva: self.cva,
            dva: self.dva,
            fca: self.fca,
            colva: self.colva,
            kva: self.kva,
            tva: self.tva,
        }
    }

    fn add_scaled(&mut self, s: &ComponentSources, w: f64) {
        self.cva += w * s.cva;
        self.dva += w * s.dva;
        self.fca += w * s.fca;
        self.colva += w * s.colva;
        self.kva += w * s.kva;
        self.tva += w * s.tva;
    }
}

const Z_MAX: f64 = 10.0;
const TIME_PANELS: usize = 24;
const Z_PANELS: usize = 12;
const NODES: usize = 12;

/// Feynman-Kac representation of each component,
/// `U_c = -int_0^T e^{-k u} E[f_c(V(u, S_u))] du`, with `k` the adjusted
/// discount rate and `S_u` lognormal under the pricing drift. Time is
/// substituted `u = T s^2` to absorb the `sqrt(u)` behaviour near 0, and the
/// Gaussian integral is split where the risk-free value changes sign and
/// where the payoff kinks.
pub fn quadrature_oracle(problem: &PdeProblem) -> Result<Decomposition> {
    problem.validate()?;
    let gl = GaussLegendre::new(NODES);
    let t_end = problem.maturity;
    let k = problem.adjusted_rate();
    let sigma = problem.volatility;
    let mu = problem.drift() - 0.5 * sigma * sigma;
    let mut out = Decomposition::default();
    let ds = 1.0 / TIME_PANELS as f64;
    for p in 0..TIME_PANELS {
        let lo = p as f64 * ds;
        for (x, w) in gl.nodes.iter().zip(&gl.weights) {
            let s = lo + 0.5 * ds * (1.0 + x);
            let u = t_end * s * s;
            let weight = -0.5 * ds * w * 2.0 * t_end * s * (-k * u).exp();
            let sd = sigma * u.sqrt();
            let spot_at = |z: f64| problem.spot * (mu * u + sd * z).exp();
            let value_at = |z: f64| problem.risk_free_value(u, spot_at(z));
            let mut cuts = vec![-Z_MAX, Z_MAX];
            let strike = problem.payoff.strike();
            if strike > 0.0 {
                cuts.push(((strike / problem.spot).ln() - mu * u) / sd);
            }
            if let Some(z0) = sign_change(&value_at, -Z_MAX, Z_MAX) {
                cuts.push(z0);
            }
            cuts.retain(|z| z.abs() <= Z_MAX);
            cuts.sort_by(f64::total_cmp);
            let mut inner = Decomposition::default();
            for pair in cuts.windows(2) {
                let (a, b) = (pair[0], pair[1]);
                if b - a <= 0.0 {
                    continue;
                }
                let h = (b - a) / Z_PANELS as f64;
                for q in 0..Z_PANELS {
                    let za = a + q as f64 * h;
                    for (y, v) in gl.nodes.iter().zip(&gl.weights) {
                        let z = za + 0.5 * h * (1.0 + y);
                        let density = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
                        inner.add_scaled(&problem.sources(value_at(z)), 0.5 * h * v * density);
                    }
                }
            }
            out.add_scaled(&inner.as_sources(), weight);
        }
    }
    Ok(out)
}

/// Root of a monotone-ish function on `[a, b]` by bisection, if it brackets one.
fn sign_change(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> Option<f64> {
    let (mut lo, mut hi) = (a, b);
    let (flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 || fhi == 0.0 || flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}
