use std::collections::BTreeMap;

use rust_decimal::prelude::ToPrimitive;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::model::{Corpus, Side};

use super::SignRandError;

/// Liquidity-provision thresholds separating market makers from
/// directional traders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MarketMakerConfig {
    pub min_markets: usize,
    pub min_two_sided_fraction: f64,
    pub max_net_to_gross: f64,
}

impl Default for MarketMakerConfig {
    fn default() -> Self {
        Self {
            min_markets: 50,
            min_two_sided_fraction: 0.6,
            max_net_to_gross: 0.2,
        }
    }
}

impl MarketMakerConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.min_two_sided_fraction) {
            return Err("market_maker.min_two_sided_fraction must be in [0,1]".into());
        }
        if !(0.0..=1.0).contains(&self.max_net_to_gross) {
            return Err("market_maker.max_net_to_gross must be in [0,1]".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketMakerStats {
    pub markets: usize,
    pub two_sided_markets: usize,
    pub net_to_gross: f64,
}

pub fn market_maker_stats(corpus: &Corpus, account_id: &str) -> Result<MarketMakerStats, SignRandError> {
    if corpus.account(account_id).is_none() {
        return Err(SignRandError::UnknownAccount(account_id.to_string()));
    }
    let mut sides: BTreeMap<&str, (bool, bool)> = BTreeMap::new();
    let mut net = Decimal::ZERO;
    let mut gross = Decimal::ZERO;
    for t in corpus.account_trades(account_id) {
        let entry = sides.entry(t.market_id.as_str()).or_default();
        match t.side {
            Side::Buy => entry.0 = true,
            Side::Sell => entry.1 = true,
        }
        net += t.signed_notional();
        gross += t.notional();
    }
    let net_to_gross = if gross.is_zero() {
        0.0
    } else {
        (net.abs() / gross).to_f64().unwrap_or(1.0)
    };
    Ok(MarketMakerStats {
        markets: sides.len(),
        two_sided_markets: sides.values().filter(|(b, s)| *b && *s).count(),
        net_to_gross,
    })
}

/// True when the account is broad, two-sided, and close to flat overall.
pub fn detect_market_maker(
    corpus: &Corpus,
    account_id: &str,
    config: &MarketMakerConfig,
) -> Result<bool, SignRandError> {
    let s = market_maker_stats(corpus, account_id)?;
    Ok(s.markets >= config.min_markets
        && s.two_sided_markets as f64 >= config.min_two_sided_fraction * s.markets as f64
        && s.net_to_gross <= config.max_net_to_gross)
}
