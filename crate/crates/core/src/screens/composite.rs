use std::collections::BTreeMap;

use chrono::Duration;
use rust_decimal::prelude::ToPrimitive;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::model::Corpus;
use crate::stats::mean_sd;

use super::ScreenError;

const WINSOR: f64 = 3.0;

/// Feature weights of the composite anomaly score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompositeWeights {
    pub cross_sectional_size: f64,
    pub within_trader_size: f64,
    pub profitability: f64,
    pub pre_event_timing: f64,
    pub directional_concentration: f64,
}

impl Default for CompositeWeights {
    fn default() -> Self {
        Self {
            cross_sectional_size: 1.0,
            within_trader_size: 1.0,
            profitability: 1.0,
            pre_event_timing: 1.0,
            directional_concentration: 1.0,
        }
    }
}

impl CompositeWeights {
    fn as_array(&self) -> [f64; 5] {
        [
            self.cross_sectional_size,
            self.within_trader_size,
            self.profitability,
            self.pre_event_timing,
            self.directional_concentration,
        ]
    }

    pub fn validate(&self) -> Result<(), String> {
        let w = self.as_array();
        if w.iter().any(|v| *v < 0.0 || !v.is_finite()) || w.iter().sum::<f64>() <= 0.0 {
            return Err("composite weights must be >= 0 with a positive sum".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompositeConfig {
    pub weights: CompositeWeights,
    /// Hours before the event counted as pre-event trading.
    pub timing_window_hours: f64,
}

impl Default for CompositeConfig {
    fn default() -> Self {
        Self {
            weights: CompositeWeights::default(),
            timing_window_hours: 48.0,
        }
    }
}

/// Per-account features in one market. Size and profitability entries are
/// cross-sectional z-scores; timing and concentration are raw fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeFeatures {
    pub account_id: String,
    pub market_id: String,
    pub cross_sectional_size: f64,
    pub within_trader_size: f64,
    pub profitability: f64,
    pub pre_event_timing: f64,
    pub directional_concentration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeScore {
    pub account_id: String,
    pub market_id: String,
    pub score: f64,
    /// Share of the market's population scoring at or below this account.
    pub percentile: f64,
    pub features: CompositeFeatures,
}

struct Raw {
    account_id: String,
    notional: f64,
    within: f64,
    profit: f64,
    timing: f64,
    concentration: f64,
}

/// Composite anomaly score of every account active in a market.
///
/// Each feature is z-scored across the market's accounts and winsorized at
/// +/-3; the score is the weighted mean of the five.
pub fn composite_score(
    corpus: &Corpus,
    market_id: &str,
    config: &CompositeConfig,
) -> Result<Vec<CompositeScore>, ScreenError> {
    let market = corpus
        .market(market_id)
        .ok_or_else(|| ScreenError::UnknownMarket(market_id.to_string()))?;
    let anchor = market.t_event.unwrap_or(market.t_resolve);
    let window_start =
        anchor - Duration::seconds((config.timing_window_hours * 3600.0).round() as i64);

    #[derive(Default)]
    struct Acc {
        gross: Decimal,
        net: Decimal,
        profit: Decimal,
        timed: Decimal,
    }
    let mut per_account: BTreeMap<&str, Acc> = BTreeMap::new();
    for t in corpus.market_trades(market_id) {
        let acc = per_account.entry(t.account_id.as_str()).or_default();
        acc.gross += t.notional();
        acc.net += t.signed_notional();
        acc.profit += t.resolution_pnl(market.outcome);
        if t.ts >= window_start && t.ts < anchor {
            acc.timed += t.notional();
        }
    }

    let raws: Vec<Raw> = per_account
        .into_iter()
        .filter(|(_, a)| a.gross > Decimal::ZERO)
        .map(|(id, a)| Raw {
            account_id: id.to_string(),
            notional: to_f64(a.gross),
            within: within_trader_z(corpus, id, market_id),
            profit: to_f64(a.profit),
            timing: to_f64(a.timed / a.gross),
            concentration: to_f64(a.net.abs() / a.gross),
        })
        .collect();
    if raws.len() < 2 {
        return Err(ScreenError::InsufficientPopulation {
            market_id: market_id.to_string(),
            active: raws.len(),
        });
    }

    let columns: [Vec<f64>; 5] = [
        zscores(raws.iter().map(|r| r.notional)),
        zscores(raws.iter().map(|r| r.within)),
        zscores(raws.iter().map(|r| r.profit)),
        zscores(raws.iter().map(|r| r.timing)),
        zscores(raws.iter().map(|r| r.concentration)),
    ];
    let weights = config.weights.as_array();
    let wsum: f64 = weights.iter().sum();
    let scores: Vec<f64> = (0..raws.len())
        .map(|i| {
            columns
                .iter()
                .zip(weights)
                .map(|(col, w)| w * col[i].clamp(-WINSOR, WINSOR))
                .sum::<f64>()
                / wsum
        })
        .collect();
    let n = raws.len() as f64;

    Ok(raws
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let at_or_below = scores.iter().filter(|&&s| s <= scores[i]).count();
            CompositeScore {
                account_id: r.account_id.clone(),
                market_id: market_id.to_string(),
                score: scores[i],
                percentile: at_or_below as f64 / n,
                features: CompositeFeatures {
                    account_id: r.account_id,
                    market_id: market_id.to_string(),
                    cross_sectional_size: columns[0][i],
                    within_trader_size: columns[1][i],
                    profitability: columns[2][i],
                    pre_event_timing: r.timing,
                    directional_concentration: r.concentration,
                },
            }
        })
        .collect())
}

fn to_f64(d: Decimal) -> f64 {
    d.to_f64().unwrap_or(0.0)
}

/// Population z-scores; all zero when the column has no spread.
fn zscores(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let v: Vec<f64> = values.collect();
    let (mean, sd) = mean_sd(&v);
    if sd <= 1e-12 * mean.abs().max(1.0) {
        return vec![0.0; v.len()];
    }
    v.iter().map(|x| (x - mean) / sd).collect()
}

/// How unusual this market's notional is against the account's own markets.
fn within_trader_z(corpus: &Corpus, account_id: &str, market_id: &str) -> f64 {
    let mut by_market: BTreeMap<&str, Decimal> = BTreeMap::new();
    for t in corpus.account_trades(account_id) {
        *by_market.entry(t.market_id.as_str()).or_default() += t.notional();
    }
    if by_market.len() < 2 {
        return 0.0;
    }
    let values: Vec<f64> = by_market.values().map(|d| to_f64(*d)).collect();
    let (mean, sd) = mean_sd(&values);
    if sd <= 0.0 {
        return 0.0;
    }
    (to_f64(by_market[market_id]) - mean) / sd
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Category, Outcome, Side};
    use crate::testkit::{day, Kit};
    use chrono::Duration;
    use rust_decimal_macros::dec;

    fn population() -> Kit {
        let mut k = Kit::new();
        k.market("m", "e", Category::Politics, Outcome::Yes);
        k.market("other", "e2", Category::Politics, Outcome::Yes);
        // Dominant: largest, all inside the 48h window, one-sided, most profit.
        k.trade("top", "m", Side::Buy, dec!(50_000), dec!(0.2), day(10) - Duration::hours(5));
        k.trade("top", "other", Side::Buy, dec!(10), dec!(0.5), day(1));
        for (i, (side, size)) in [(Side::Buy, 900), (Side::Sell, 700), (Side::Buy, 400), (Side::Sell, 1200)]
            .into_iter()
            .enumerate()
        {
            let a = format!("n{i}");
            k.trade(&a, "m", side, Decimal::from(size), dec!(0.4), day(2));
            k.trade(&a, "m", side.flipped(), Decimal::from(size / 3), dec!(0.45), day(3));
            k.trade(&a, "other", side, Decimal::from(size), dec!(0.5), day(1));
        }
        k
    }

    #[test]
    fn dominant_account_ranks_first() {
        let scores = composite_score(&population().build(), "m", &CompositeConfig::default()).unwrap();
        let top = scores.iter().find(|s| s.account_id == "top").unwrap();
        assert_eq!(top.percentile, 1.0);
        assert!(scores.iter().filter(|s| s.account_id != "top").all(|s| s.score < top.score));
        assert_eq!(top.features.pre_event_timing, 1.0);
        assert_eq!(top.features.directional_concentration, 1.0);
    }

    #[test]
    fn identical_accounts_tie() {
        let mut k = Kit::new();
        k.market("m", "e", Category::Sports, Outcome::No);
        k.trade("a", "m", Side::Buy, dec!(100), dec!(0.3), day(2));
        k.trade("b", "m", Side::Buy, dec!(100), dec!(0.3), day(2));
        let s = composite_score(&k.build(), "m", &CompositeConfig::default()).unwrap();
        assert_eq!(s[0].score, s[1].score);
        assert_eq!(s[0].percentile, s[1].percentile);
    }

    #[test]
    fn zero_notional_accounts_are_excluded() {
        let mut k = population();
        k.trade("ghost", "m", Side::Buy, dec!(0), dec!(0.4), day(2));
        let s = composite_score(&k.build(), "m", &CompositeConfig::default()).unwrap();
        assert!(s.iter().all(|x| x.account_id != "ghost"));
        assert_eq!(s.len(), 5);
    }

    #[test]
    fn population_errors() {
        let mut k = Kit::new();
        k.market("m", "e", Category::Sports, Outcome::No);
        k.trade("a", "m", Side::Buy, dec!(100), dec!(0.3), day(2));
        let c = k.build();
        assert!(matches!(
            composite_score(&c, "m", &CompositeConfig::default()),
            Err(ScreenError::InsufficientPopulation { active: 1, .. })
        ));
        assert!(matches!(composite_score(&c, "x", &CompositeConfig::default()), Err(ScreenError::UnknownMarket(_))));
    }

    #[test]
    fn size_zscores_are_scale_free_and_id_permutation_free() {
        let base = composite_score(&population().build(), "m", &CompositeConfig::default()).unwrap();
        let mut k = population();
        for t in &mut k.raw.trades {
            t.size *= dec!(7.5);
        }
        let scaled = composite_score(&k.build(), "m", &CompositeConfig::default()).unwrap();
        for (a, b) in base.iter().zip(&scaled) {
            assert!((a.features.cross_sectional_size - b.features.cross_sectional_size).abs() < 1e-12);
        }

        let mut k = population();
        for t in &mut k.raw.trades {
            t.account_id = format!("z-{}", t.account_id.chars().rev().collect::<String>());
        }
        let renamed = composite_score(&k.build(), "m", &CompositeConfig::default()).unwrap();
        let mut s1: Vec<f64> = base.iter().map(|s| s.score).collect();
        let mut s2: Vec<f64> = renamed.iter().map(|s| s.score).collect();
        s1.sort_by(f64::total_cmp);
        s2.sort_by(f64::total_cmp);
        for (a, b) in s1.iter().zip(&s2) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
