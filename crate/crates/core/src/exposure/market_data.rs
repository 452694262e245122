use serde::{Deserialize, Serialize};

use super::curve::DiscountCurve;
use super::model::ShortRateModel;
use crate::error::{Error, Result};

pub const MARKET_SCHEMA_VERSION: u32 = 1;

/// Market data file: discount curve, short-rate model and optional
/// Monte Carlo defaults.
///
/// ```json
/// {
///   "schemaVersion": 1,
///   "curve": { "pillars": [1, 30], "zeroRates": [0.02, 0.02] },
///   "model": { "meanReversion": 0.05, "volatility": 0.008 },
///   "seed": 42,
///   "paths": 50000
/// }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct MarketData {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub curve: DiscountCurve,
    #[serde(default)]
    pub model: ShortRateModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paths: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub antithetic: Option<bool>,
}

fn schema_version() -> u32 {
    MARKET_SCHEMA_VERSION
}

impl Default for MarketData {
    /// Synthetic desk market: flat 2% GBP zero curve, `a = 5%`, `sigma = 0.8%`.
    fn default() -> Self {
        Self {
            schema_version: MARKET_SCHEMA_VERSION,
            curve: DiscountCurve::new(vec![1.0, 30.0], vec![0.02, 0.02]).expect("default curve"),
            model: ShortRateModel::default(),
            seed: None,
            paths: None,
            antithetic: None,
        }
    }
}

impl MarketData {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let m: MarketData = serde_json::from_str(text)
            .map_err(|e| Error::validation(format!("market data: {e}")))?;
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != MARKET_SCHEMA_VERSION {
            return Err(Error::validation(format!(
                "unsupported market data schemaVersion {}",
                self.schema_version
            )));
        }
        self.model.validate()?;
        if self.paths == Some(0) {
            return Err(Error::validation("paths must be at least 1"));
        }
        Ok(())
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("market data serializes")
    }
}
