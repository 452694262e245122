use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use xva_core::exposure::{DiscountCurve, MarketData, McSettings, ShortRateModel, SwapSpec};
use xva_core::pde::{Grid, PdeProblem};
use xva_core::regcap::{builtin_rating, CounterpartyProfile};

use crate::error::CliError;
use crate::presets;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_PATHS: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct IssuerConfig {
    pub spread_bp: f64,
    #[serde(default = "default_recovery")]
    pub recovery: f64,
}

fn default_recovery() -> f64 {
    0.4
}

impl Default for IssuerConfig {
    fn default() -> Self {
        Self { spread_bp: 100.0, recovery: default_recovery() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Tolerances {
    /// Flag rows whose Monte Carlo standard error exceeds this in any component.
    #[serde(default = "default_se_bps")]
    pub max_standard_error_bps: f64,
    /// Relative tolerance of `pde-verify`.
    #[serde(default = "default_pde_relative")]
    pub pde_relative: f64,
}

fn default_se_bps() -> f64 {
    1.0
}

fn default_pde_relative() -> f64 {
    5e-3
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { max_standard_error_bps: default_se_bps(), pde_relative: default_pde_relative() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PdeSection {
    #[serde(default = "PdeProblem::example")]
    pub problem: PdeProblem,
    #[serde(default = "default_grid")]
    pub grid: Grid,
}

fn default_grid() -> Grid {
    Grid::new(401, 400)
}

impl Default for PdeSection {
    fn default() -> Self {
        Self { problem: PdeProblem::example(), grid: default_grid() }
    }
}

/// Run configuration. Sweep lists expand to one report row per
/// `(hedgeFraction, priceOfRisk, capitalFunding, rating)` combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    /// Market data file, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub market_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve: Option<DiscountCurve>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ShortRateModel>,
    pub swaps: Vec<SwapSpec>,
    #[serde(default)]
    pub issuer: IssuerConfig,
    pub ratings: Vec<String>,
    /// Replaces the built-in rating table when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rating_table: Option<Vec<CounterpartyProfile>>,
    /// Rating of the protection seller; the hedged CCR charge uses the better of it and the counterparty.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ccr_provider_rating: Option<String>,
    pub hedge_fraction: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub price_of_risk_xi: Option<Vec<f64>>,
    /// Absolute market price of default risk per year, converted per rating.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_lambda: Option<Vec<f64>>,
    #[serde(default = "default_capital_funding")]
    pub capital_funding: Vec<f64>,
    #[serde(default = "default_cost_of_capital")]
    pub cost_of_capital: f64,
    #[serde(default = "default_min_ratio")]
    pub min_capital_ratio: f64,
    #[serde(default = "default_horizon")]
    pub cva_var_horizon: f64,
    #[serde(default = "default_tax_rate")]
    pub tax_rate: f64,
    #[serde(default)]
    pub tax_own_default_accruals: bool,
    #[serde(default)]
    pub tax_compensator: bool,
    #[serde(default)]
    pub collateral_spread_bp: f64,
    #[serde(default = "default_grid_step")]
    pub grid_step: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paths: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub antithetic: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pde: Option<PdeSection>,
}

fn default_capital_funding() -> Vec<f64> {
    vec![0.0]
}
fn default_cost_of_capital() -> f64 {
    0.10
}
fn default_min_ratio() -> f64 {
    0.08
}
fn default_horizon() -> f64 {
    1.0
}
fn default_tax_rate() -> f64 {
    0.21
}
fn default_grid_step() -> f64 {
    0.25
}

/// One problem found in a configuration, located by its field path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self { field: field.into(), message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.field, self.message)
        }
    }
}

/// Settings given on the command line; they win over the config file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub paths: Option<usize>,
    pub format: Option<Format>,
    pub workers: Option<usize>,
}

/// A configuration with its market data and Monte Carlo settings resolved.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: RunConfig,
    pub curve: DiscountCurve,
    pub model: ShortRateModel,
    pub mc: McSettings,
    pub format: Format,
}

/// Where a configuration came from; relative market files resolve against `base_dir`.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: RunConfig,
    pub base_dir: Option<PathBuf>,
    pub name: String,
}

/// Reads a config file, or a built-in preset when no such file exists.
pub fn load(arg: &str) -> Result<Loaded, CliError> {
    let path = Path::new(arg);
    if path.exists() {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let config = parse(&text)?;
        return Ok(Loaded { config, base_dir: path.parent().map(Path::to_path_buf), name: arg.to_string() });
    }
    match presets::get(arg) {
        Some(text) => Ok(Loaded { config: parse(text)?, base_dir: None, name: arg.to_string() }),
        None => Err(CliError::Io {
            path: path.to_path_buf(),
            message: format!("no such file, and not a preset ({})", presets::NAMES.join(", ")),
        }),
    }
}

/// Parses JSON, reporting the failing field path with line and column.
pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = match e.path().to_string() {
            p if p == "." => String::new(),
            p => p,
        };
        let inner = e.inner();
        CliError::Validation(vec![Diagnostic::new(
            field,
            format!("{inner}"),
        )])
    })
}

fn check(out: &mut Vec<Diagnostic>, ok: bool, field: impl Into<String>, message: impl Into<String>) {
    if !ok {
        out.push(Diagnostic::new(field, message));
    }
}

fn check_list(out: &mut Vec<Diagnostic>, name: &str, values: &[f64], ok: impl Fn(f64) -> bool, what: &str) {
    if values.is_empty() {
        out.push(Diagnostic::new(name, "list must not be empty"));
    }
    for (i, &v) in values.iter().enumerate() {
        check(out, ok(v), format!("{name}[{i}]"), format!("{v} {what}"));
    }
}

impl RunConfig {
    /// Counterparty data for a rating label.
    pub fn rating(&self, label: &str) -> Option<CounterpartyProfile> {
        match &self.rating_table {
            Some(table) => table.iter().find(|c| c.rating == label).cloned(),
            None => builtin_rating(label),
        }
    }

    /// Full schema and range check; never runs the pipeline.
    pub fn validate(&self, base_dir: Option<&Path>) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        check(
            &mut out,
            self.schema_version == SCHEMA_VERSION,
            "schemaVersion",
            format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
        );
        match self.market(base_dir) {
            Err(CliError::Validation(d)) => out.extend(d),
            Err(e) => out.push(Diagnostic::new("marketFile", format!("cannot read {e}"))),
            Ok(_) => {}
        }
        if let Some(m) = &self.model {
            if let Err(e) = m.validate() {
                out.push(Diagnostic::new("model", e.to_string()));
            }
        }

        if self.swaps.is_empty() {
            out.push(Diagnostic::new("swaps", "list must not be empty"));
        }
        for (i, s) in self.swaps.iter().enumerate() {
            if let Err(e) = s.validate() {
                out.push(Diagnostic::new(format!("swaps[{i}]"), e.to_string()));
            }
        }
        if !self.swaps.is_empty() && self.swaps.iter().all(|s| s.collateralized) {
            out.push(Diagnostic::new("swaps", "needs an uncollateralized swap to quote bps of notional"));
        }

        check(
            &mut out,
            self.issuer.spread_bp.is_finite() && self.issuer.spread_bp >= 0.0,
            "issuer.spreadBp",
            format!("{} must be finite and non-negative", self.issuer.spread_bp),
        );
        check(
            &mut out,
            (0.0..1.0).contains(&self.issuer.recovery),
            "issuer.recovery",
            format!("{} outside [0, 1)", self.issuer.recovery),
        );

        if let Some(table) = &self.rating_table {
            for (i, c) in table.iter().enumerate() {
                if let Err(e) = c.validate() {
                    out.push(Diagnostic::new(format!("ratingTable[{i}]"), e.to_string()));
                }
            }
        }
        if self.ratings.is_empty() {
            out.push(Diagnostic::new("ratings", "list must not be empty"));
        }
        for (i, r) in self.ratings.iter().enumerate() {
            check(&mut out, self.rating(r).is_some(), format!("ratings[{i}]"), format!("unknown rating {r:?}"));
        }
        if let Some(p) = &self.ccr_provider_rating {
            check(&mut out, self.rating(p).is_some(), "ccrProviderRating", format!("unknown rating {p:?}"));
        }

        let unit = |v: f64| (0.0..=1.0).contains(&v);
        check_list(&mut out, "hedgeFraction", &self.hedge_fraction, unit, "outside [0, 1]");
        check_list(&mut out, "capitalFunding", &self.capital_funding, unit, "outside [0, 1]");
        match (&self.price_of_risk_xi, &self.m_lambda) {
            (Some(_), Some(_)) => {
                out.push(Diagnostic::new("mLambda", "give either priceOfRiskXi or mLambda, not both"));
            }
            (Some(xi), None) => {
                check_list(&mut out, "priceOfRiskXi", xi, |v| v <= 1.0, "above 1 gives a negative physical hazard")
            }
            (None, Some(m)) => {
                check_list(&mut out, "mLambda", m, f64::is_finite, "must be finite");
                for r in self.ratings.iter().filter_map(|r| self.rating(r)) {
                    let Ok(lambda) = r.hazard() else { continue };
                    for (i, &v) in m.iter().enumerate() {
                        if v != 0.0 && lambda == 0.0 {
                            out.push(Diagnostic::new(
                                format!("mLambda[{i}]"),
                                format!("rating {} has zero hazard", r.rating),
                            ));
                        } else if lambda > 0.0 && v / lambda > 1.0 {
                            out.push(Diagnostic::new(
                                format!("mLambda[{i}]"),
                                format!("{v} exceeds the hazard {lambda:.6} of rating {}", r.rating),
                            ));
                        }
                    }
                }
            }
            (None, None) => {}
        }

        let finite_nonneg = |v: f64| v.is_finite() && v >= 0.0;
        check(&mut out, finite_nonneg(self.cost_of_capital), "costOfCapital", "must be finite and non-negative");
        check(
            &mut out,
            self.min_capital_ratio > 0.0 && self.min_capital_ratio <= 1.0,
            "minCapitalRatio",
            format!("{} outside (0, 1]", self.min_capital_ratio),
        );
        check(&mut out, self.cva_var_horizon > 0.0 && self.cva_var_horizon.is_finite(), "cvaVarHorizon", "must be positive");
        check(&mut out, (0.0..1.0).contains(&self.tax_rate), "taxRate", format!("{} outside [0, 1)", self.tax_rate));
        check(&mut out, self.collateral_spread_bp.is_finite(), "collateralSpreadBp", "must be finite");
        check(
            &mut out,
            self.grid_step > 0.0 && self.grid_step <= 1.0,
            "gridStep",
            format!("{} outside (0, 1]", self.grid_step),
        );
        check(&mut out, self.paths != Some(0), "paths", "must be at least 1");
        check(
            &mut out,
            self.tolerances.max_standard_error_bps > 0.0,
            "tolerances.maxStandardErrorBps",
            "must be positive",
        );
        check(
            &mut out,
            self.tolerances.pde_relative > 0.0 && self.tolerances.pde_relative.is_finite(),
            "tolerances.pdeRelative",
            "must be positive",
        );
        if let Some(pde) = &self.pde {
            if let Err(e) = pde.problem.validate() {
                out.push(Diagnostic::new("pde.problem", e.to_string()));
            }
            if let Err(e) = pde.grid.validate() {
                out.push(Diagnostic::new("pde.grid", e.to_string()));
            }
        }
        out
    }

    fn market_path(&self, base_dir: Option<&Path>) -> Option<PathBuf> {
        let file = self.market_file.as_ref()?;
        Some(match base_dir {
            Some(dir) if file.is_relative() => dir.join(file),
            _ => file.clone(),
        })
    }

    /// Market data file contents, if one is referenced. An unreadable file is
    /// an I/O error, a malformed one a validation error.
    fn market(&self, base_dir: Option<&Path>) -> Result<Option<MarketData>, CliError> {
        let Some(path) = self.market_path(base_dir) else { return Ok(None) };
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        MarketData::from_json_str(&text)
            .map(Some)
            .map_err(|e| CliError::Validation(vec![Diagnostic::new("marketFile", format!("{}: {e}", path.display()))]))
    }

    /// The price-of-risk sweep as `xi` values for one counterparty hazard.
    pub fn price_of_risk_for(&self, hazard: f64) -> Vec<f64> {
        match (&self.price_of_risk_xi, &self.m_lambda) {
            (_, Some(m)) => m.iter().map(|v| if hazard > 0.0 { v / hazard } else { 0.0 }).collect(),
            (Some(xi), None) => xi.clone(),
            (None, None) => vec![0.0],
        }
    }

    /// Length of the price-of-risk sweep.
    pub fn price_of_risk_len(&self) -> usize {
        match (&self.price_of_risk_xi, &self.m_lambda) {
            (_, Some(m)) => m.len(),
            (Some(xi), None) => xi.len(),
            (None, None) => 1,
        }
    }

    /// Notional for bps conversion: the uncollateralized swaps.
    pub fn bps_notional(&self) -> f64 {
        self.swaps.iter().filter(|s| !s.collateralized).map(|s| s.notional).sum()
    }

    pub fn source(&self) -> String {
        self.source_label.clone().or_else(|| self.ccr_provider_rating.clone()).unwrap_or_else(|| "-".to_string())
    }

    /// Validates and resolves market data and Monte Carlo settings. Command
    /// line beats config, config beats the market file, which beats defaults.
    pub fn resolve(self, base_dir: Option<&Path>, overrides: &Overrides) -> Result<Resolved, CliError> {
        let market = self.market(base_dir);
        if let Err(e @ CliError::Io { .. }) = market {
            return Err(e);
        }
        let diags = self.validate(base_dir);
        if !diags.is_empty() {
            return Err(CliError::Validation(diags));
        }
        let market = market?;
        let fallback = MarketData::default();
        let curve = self
            .curve
            .clone()
            .or_else(|| market.as_ref().map(|m| m.curve.clone()))
            .unwrap_or(fallback.curve);
        let model = self.model.or_else(|| market.as_ref().map(|m| m.model)).unwrap_or(fallback.model);
        let seed = overrides
            .seed
            .or(self.seed)
            .or_else(|| market.as_ref().and_then(|m| m.seed))
            .unwrap_or(DEFAULT_SEED);
        let paths = overrides
            .paths
            .or(self.paths)
            .or_else(|| market.as_ref().and_then(|m| m.paths))
            .unwrap_or(DEFAULT_PATHS);
        if paths == 0 {
            return Err(CliError::Validation(vec![Diagnostic::new("paths", "must be at least 1")]));
        }
        let antithetic = self.antithetic.or_else(|| market.as_ref().and_then(|m| m.antithetic)).unwrap_or(true);
        let mut mc = McSettings::new(paths, seed);
        mc.antithetic = antithetic;
        mc.workers = overrides.workers;
        let format = overrides.format.or(self.format).unwrap_or(Format::Table);
        Ok(Resolved { config: self, curve, model, mc, format })
    }
}
