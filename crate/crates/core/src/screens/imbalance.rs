use std::collections::BTreeSet;

use chrono::Duration;
use rust_decimal::prelude::ToPrimitive;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::model::{Corpus, Side, Timestamp};
use crate::stats::{ols, OlsFit};

use super::ScreenError;

/// Minimum number of market-periods with defined imbalance.
pub const MIN_PERIODS: usize = 10;

/// Net buy share of flagged accounts' notional in `[start, end)`:
/// `(buy - sell) / (buy + sell)`, zero when they did not trade.
pub fn insider_order_imbalance(
    corpus: &Corpus,
    market_id: &str,
    flagged: &BTreeSet<String>,
    interval: (Timestamp, Timestamp),
) -> Result<f64, ScreenError> {
    if corpus.market(market_id).is_none() {
        return Err(ScreenError::UnknownMarket(market_id.to_string()));
    }
    Ok(flow(corpus, market_id, flagged, interval)
        .map(|(net, gross)| (net / gross).to_f64().unwrap_or(0.0))
        .unwrap_or(0.0))
}

/// (net signed, gross) flagged notional; `None` when gross is zero.
fn flow(
    corpus: &Corpus,
    market_id: &str,
    flagged: &BTreeSet<String>,
    (start, end): (Timestamp, Timestamp),
) -> Option<(Decimal, Decimal)> {
    let (mut buy, mut sell) = (Decimal::ZERO, Decimal::ZERO);
    for t in corpus
        .market_trades(market_id)
        .filter(|t| t.ts >= start && t.ts < end && flagged.contains(&t.account_id))
    {
        match t.side {
            Side::Buy => buy += t.notional(),
            Side::Sell => sell += t.notional(),
        }
    }
    let gross = buy + sell;
    (!gross.is_zero()).then_some((buy - sell, gross))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Predictiveness {
    pub slope_price: f64,
    pub t_price: f64,
    pub n_price: usize,
    pub slope_outcome: f64,
    pub t_outcome: f64,
    pub n_outcome: usize,
}

/// One market-period observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodObservation {
    pub imbalance: f64,
    /// Price change over the following period, when one exists.
    pub next_price_change: Option<f64>,
    pub outcome: f64,
}

/// Cuts every market into `period`-long bins from its open and records the
/// flagged imbalance of each bin that has flagged flow.
pub fn imbalance_observations(
    corpus: &Corpus,
    flagged: &BTreeSet<String>,
    period: Duration,
) -> Vec<PeriodObservation> {
    let mut out = Vec::new();
    if period <= Duration::zero() {
        return out;
    }
    for market in corpus.markets() {
        let series = corpus.price_series(&market.market_id);
        let mut start = market.t_open;
        while start < market.t_resolve {
            let end = start + period;
            if let Some((net, gross)) = flow(corpus, &market.market_id, flagged, (start, end)) {
                let next_price_change = (end < market.t_resolve)
                    .then(|| {
                        let s = series?;
                        let next_end = (end + period).min(market.t_resolve);
                        Some(s.price_at(next_end).ok()? - s.price_at(end).ok()?)
                    })
                    .flatten();
                out.push(PeriodObservation {
                    imbalance: (net / gross).to_f64().unwrap_or(0.0),
                    next_price_change,
                    outcome: market.outcome.bit() as f64,
                });
            }
            start = end;
        }
    }
    out
}

/// Pooled OLS of next-period price change and of final outcome on
/// flagged-account imbalance.
pub fn imbalance_predictiveness(
    corpus: &Corpus,
    flagged: &BTreeSet<String>,
    period: Duration,
) -> Result<Predictiveness, ScreenError> {
    predictiveness_from(&imbalance_observations(corpus, flagged, period))
}

pub fn predictiveness_from(obs: &[PeriodObservation]) -> Result<Predictiveness, ScreenError> {
    if obs.len() < MIN_PERIODS {
        return Err(ScreenError::InsufficientData(format!(
            "{} market-periods with flagged flow, need {MIN_PERIODS}",
            obs.len()
        )));
    }
    let x: Vec<f64> = obs.iter().map(|o| o.imbalance).collect();
    let y: Vec<f64> = obs.iter().map(|o| o.outcome).collect();
    let outcome = ols(&x, &y).ok_or_else(|| {
        ScreenError::InsufficientData("imbalance has no variance across periods".into())
    })?;
    let (px, py): (Vec<f64>, Vec<f64>) = obs
        .iter()
        .filter_map(|o| o.next_price_change.map(|d| (o.imbalance, d)))
        .unzip();
    let price = ols(&px, &py).unwrap_or(OlsFit {
        n: px.len(),
        intercept: 0.0,
        slope: 0.0,
        se_slope: 0.0,
        t_slope: 0.0,
    });
    Ok(Predictiveness {
        slope_price: price.slope,
        t_price: price.t_slope,
        n_price: price.n,
        slope_outcome: outcome.slope,
        t_outcome: outcome.t_slope,
        n_outcome: outcome.n,
    })
}
