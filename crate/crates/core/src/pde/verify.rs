use serde::Serialize;

use super::oracle::quadrature_oracle;
use super::problem::{Component, PdeProblem};
use super::solver::{grid_diagnostics, spot_adjustments, Grid};
use crate::error::Result;

/// Errors below this are treated as matching regardless of the relative
/// tolerance; components that vanish identically land here.
const ABSOLUTE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ComponentCheck {
    pub label: String,
    pub pde: f64,
    pub oracle: f64,
    pub abs_error: f64,
    pub rel_error: f64,
    pub passed: bool,
}

impl ComponentCheck {
    fn new(label: &str, pde: f64, oracle: f64, tolerance: f64) -> Self {
        let abs_error = (pde - oracle).abs();
        let rel_error = if oracle != 0.0 { abs_error / oracle.abs() } else { abs_error };
        Self {
            label: label.to_string(),
            pde,
            oracle,
            abs_error,
            rel_error,
            passed: abs_error <= ABSOLUTE_FLOOR || rel_error <= tolerance,
        }
    }
}

/// PDE against quadrature for every component, the total and the tax
/// switch, plus an observed convergence order.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VerificationReport {
    pub tolerance: f64,
    pub grid: Grid,
    pub risk_free_value: f64,
    pub components: Vec<ComponentCheck>,
    /// `V_hat - V` from the full solve against the sum of quadrature components.
    pub total: ComponentCheck,
    /// Difference between the full solve with and without tax against the
    /// quadrature TVA.
    pub tax_switch: ComponentCheck,
    /// `log2` of the error ratio between the halved grid and this grid.
    pub convergence_order: Option<f64>,
    pub max_abs_error: f64,
    pub max_rel_error: f64,
    pub passed: bool,
    pub diagnostics: Vec<String>,
}

impl VerificationReport {
    pub fn checks(&self) -> impl Iterator<Item = &ComponentCheck> {
        self.components.iter().chain([&self.total, &self.tax_switch])
    }
}

pub fn verify_decomposition(problem: &PdeProblem, grid: &Grid, tolerance: f64) -> Result<VerificationReport> {
    problem.validate()?;
    grid.validate()?;
    let oracle = quadrature_oracle(problem)?;
    let (total, parts) = spot_adjustments(problem, grid)?;
    let components: Vec<ComponentCheck> = Component::ALL
        .iter()
        .zip(parts)
        .map(|(c, pde)| ComponentCheck::new(c.label(), pde, oracle.get(*c), tolerance))
        .collect();
    let total = ComponentCheck::new("total", total, oracle.total(), tolerance);

    let untaxed = PdeProblem { tax_rate: 0.0, ..*problem };
    let (total_untaxed, _) = spot_adjustments(&untaxed, grid)?;
    let tax_switch = ComponentCheck::new("tax on - off", total.pde - total_untaxed, oracle.tva, tolerance);

    let mut diagnostics = grid_diagnostics(problem, grid);
    let coarse = grid.coarsened();
    let convergence_order = if coarse.validate().is_ok() && coarse.nodes() >= 5 {
        let (coarse_total, _) = spot_adjustments(problem, &coarse)?;
        let (e_fine, e_coarse) = (total.abs_error, (coarse_total - total.oracle).abs());
        if e_fine > 0.0 && e_coarse > 0.0 {
            Some((e_coarse / e_fine).log2())
        } else {
            None
        }
    } else {
        None
    };
    if let Some(order) = convergence_order {
        if order < 1.5 {
            diagnostics.push(format!("observed convergence order {order:.2} is below second order"));
        }
    }

    let mut report = VerificationReport {
        tolerance,
        grid: *grid,
        risk_free_value: problem.risk_free_value(0.0, problem.spot),
        components,
        total,
        tax_switch,
        convergence_order,
        max_abs_error: 0.0,
        max_rel_error: 0.0,
        passed: false,
        diagnostics,
    };
    report.max_abs_error = report.checks().map(|c| c.abs_error).fold(0.0, f64::max);
    report.max_rel_error = report.checks().map(|c| c.rel_error).fold(0.0, f64::max);
    let passed = report.checks().all(|c| c.passed);
    let failures: Vec<String> = report
        .checks()
        .filter(|c| !c.passed)
        .map(|c| {
            format!(
                "{} differs from quadrature: pde {:.8} oracle {:.8} (relative {:.2e})",
                c.label, c.pde, c.oracle, c.rel_error
            )
        })
        .collect();
    report.passed = passed;
    report.diagnostics.extend(failures);
    Ok(report)
}
