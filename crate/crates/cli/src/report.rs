use std::fmt::Write as _;

use serde::Serialize;
use xva_core::pde::VerificationReport;

use crate::config::{Diagnostic, Format};
use crate::run::RunReport;

/// Nearest basis point, half away from zero, never `-0`.
pub fn round_bp(x: f64) -> f64 {
    x.round() + 0.0
}

fn fmt_fraction(x: f64) -> String {
    format!("{}", x + 0.0)
}

pub fn render_run(report: &RunReport, format: Format) -> String {
    match format {
        Format::Table => run_table(report),
        Format::Csv => run_csv(report),
        Format::Json => to_json(report),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn run_table(report: &RunReport) -> String {
    let header = [
        "Source", "psi", "m_lambda", "phi", "Rating", "CVA", "DVA", "FCA", "COLVA", "KVA_MR", "KVA_CCR", "KVA_CVA",
        "TVA", "Total",
    ];
    let mut cells: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
    for row in &report.rows {
        let b = &row.bps;
        let mut line = vec![
            row.source.clone(),
            fmt_fraction(row.hedge_fraction),
            // the table quotes the dimensionless price of risk, which has no role under a full hedge
            if row.hedge_fraction == 1.0 { "na".to_string() } else { fmt_fraction(row.price_of_risk) },
            fmt_fraction(row.capital_funding),
            row.rating.clone(),
        ];
        for v in [b.cva, b.dva, b.fca, b.colva, b.kva_mr, b.kva_ccr, b.kva_cva_var, b.tva, b.total] {
            line.push(format!("{}", round_bp(v)));
        }
        if row.warning.is_some() {
            line.last_mut().unwrap().push('*');
        }
        cells.push(line);
    }
    let widths: Vec<usize> =
        (0..header.len()).map(|c| cells.iter().map(|r| r[c].len()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for (i, line) in cells.iter().enumerate() {
        let mut text = String::new();
        for (c, cell) in line.iter().enumerate() {
            if c > 0 {
                text.push_str("  ");
            }
            // text columns left, numbers right
            if c < 5 && c != 1 && c != 3 {
                let _ = write!(text, "{cell:<w$}", w = widths[c]);
            } else {
                let _ = write!(text, "{cell:>w$}", w = widths[c]);
            }
        }
        out.push_str(text.trim_end());
        out.push('\n');
        if i == 0 {
            out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
            out.push('\n');
        }
    }
    let _ = writeln!(
        out,
        "bps of notional {}; {} paths, seed {}",
        fmt_fraction(report.notional),
        report.paths,
        report.seed
    );
    for row in report.rows.iter().filter(|r| r.warning.is_some()) {
        let _ = writeln!(
            out,
            "* {} psi={} phi={}: {}",
            row.rating,
            fmt_fraction(row.hedge_fraction),
            fmt_fraction(row.capital_funding),
            row.warning.as_deref().unwrap_or_default()
        );
    }
    out
}

#[derive(Serialize)]
struct CsvRow<'a> {
    source: &'a str,
    psi: f64,
    xi: f64,
    m_lambda: f64,
    phi: f64,
    rating: &'a str,
    cva: f64,
    dva: f64,
    fca: f64,
    colva: f64,
    kva_mr: f64,
    kva_ccr: f64,
    kva_cva_var: f64,
    tva: f64,
    total: f64,
    se_cva: f64,
    se_dva: f64,
    se_fca: f64,
    se_colva: f64,
    se_kva_mr: f64,
    se_kva_ccr: f64,
    se_kva_cva_var: f64,
    se_tva: f64,
    se_total: f64,
    warning: &'a str,
}

fn run_csv(report: &RunReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &report.rows {
        let (b, s) = (&row.bps, &row.standard_error_bps);
        w.serialize(CsvRow {
            source: &row.source,
            psi: row.hedge_fraction,
            xi: row.price_of_risk,
            m_lambda: row.m_lambda,
            phi: row.capital_funding,
            rating: &row.rating,
            cva: b.cva,
            dva: b.dva,
            fca: b.fca,
            colva: b.colva,
            kva_mr: b.kva_mr,
            kva_ccr: b.kva_ccr,
            kva_cva_var: b.kva_cva_var,
            tva: b.tva,
            total: b.total,
            se_cva: s.cva,
            se_dva: s.dva,
            se_fca: s.fca,
            se_colva: s.colva,
            se_kva_mr: s.kva_mr,
            se_kva_ccr: s.kva_ccr,
            se_kva_cva_var: s.kva_cva_var,
            se_tva: s.tva,
            se_total: s.total,
            warning: row.warning.as_deref().unwrap_or(""),
        })
        .expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}

pub fn render_diagnostics(diags: &[Diagnostic], format: Format) -> String {
    match format {
        Format::Json => to_json(&diags),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for d in diags {
                w.serialize(d).expect("in-memory csv");
            }
            if diags.is_empty() {
                w.write_record(["field", "message"]).expect("in-memory csv");
            }
            String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
        }
        Format::Table => {
            if diags.is_empty() {
                "ok\n".to_string()
            } else {
                diags.iter().map(|d| format!("{d}\n")).collect()
            }
        }
    }
}

pub fn render_verification(report: &VerificationReport, format: Format) -> String {
    match format {
        Format::Json => to_json(report),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for c in report.checks() {
                w.serialize(c).expect("in-memory csv");
            }
            String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
        }
        Format::Table => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "grid {}x{}, risk-free value {:.6}, tolerance {}",
                report.grid.nodes(),
                report.grid.time_steps,
                report.risk_free_value,
                report.tolerance
            );
            let _ = writeln!(out, "{:<14}{:>16}{:>16}{:>12}  ok", "component", "pde", "quadrature", "rel err");
            for c in report.checks() {
                let _ = writeln!(
                    out,
                    "{:<14}{:>16.8}{:>16.8}{:>12.2e}  {}",
                    c.label,
                    c.pde,
                    c.oracle,
                    c.rel_error,
                    if c.passed { "yes" } else { "NO" }
                );
            }
            match report.convergence_order {
                Some(o) => {
                    let _ = writeln!(out, "observed convergence order {o:.3}");
                }
                None => out.push_str("convergence order not measurable\n"),
            }
            for d in &report.diagnostics {
                let _ = writeln!(out, "warning: {d}");
            }
            let _ = writeln!(out, "{}", if report.passed { "PASS" } else { "FAIL" });
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_is_half_away_from_zero() {
        assert_eq!(round_bp(2.5), 3.0);
        assert_eq!(round_bp(-2.5), -3.0);
        assert_eq!(round_bp(-0.4).to_string(), "0");
        assert_eq!(round_bp(0.49), 0.0);
    }

    #[test]
    fn fractions_print_compactly() {
        assert_eq!(fmt_fraction(1.0), "1");
        assert_eq!(fmt_fraction(-0.5), "-0.5");
        assert_eq!(fmt_fraction(10000.0), "10000");
    }
}
