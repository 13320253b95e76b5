use std::collections::BTreeSet;

use rust_decimal::prelude::ToPrimitive;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::model::{days_to_duration, Corpus, Timestamp};
use crate::parallel::par_map;

use super::ScreenError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TimingReference {
    /// Event time, falling back to the earliest member resolution.
    TEvent,
    /// Earliest member resolution.
    TResolve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LifecycleConfig {
    pub window_days: f64,
    pub min_volume: Decimal,
    pub min_profit: Decimal,
    pub max_external_volume_fraction: f64,
    pub reference: TimingReference,
}

impl Default for LifecycleConfig {
    fn default() -> Self {
        Self {
            window_days: 7.0,
            min_volume: Decimal::from(1_000),
            min_profit: Decimal::from(1_000),
            max_external_volume_fraction: 0.0,
            reference: TimingReference::TEvent,
        }
    }
}

impl LifecycleConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.window_days > 0.0) {
            return Err("lifecycle.window_days must be > 0".into());
        }
        if self.min_volume < Decimal::ZERO || self.min_profit < Decimal::ZERO {
            return Err("lifecycle thresholds must be >= 0".into());
        }
        if !(0.0..=1.0).contains(&self.max_external_volume_fraction) {
            return Err("lifecycle.max_external_volume_fraction must be in [0,1]".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifecycleFlag {
    pub account_id: String,
    pub event_id: String,
    pub flagged: bool,
    pub timing_ok: bool,
    pub dormancy_ok: bool,
    pub exclusivity_ok: bool,
    pub volume_ok: bool,
    pub profit_ok: bool,
    pub realized_profit: Decimal,
    pub gross_volume: Decimal,
    pub external_volume_fraction: f64,
    pub t_ref: Timestamp,
    pub created_at: Option<Timestamp>,
}

/// Single-event lifecycle-and-conviction screen for one (account, event).
///
/// Timing: created within `window_days` before the reference time.
/// Dormancy: no trades after the event's last member market resolves.
/// Conviction: trades (up to the external tolerance) only in this event,
/// with gross volume and resolution profit at or above the thresholds.
pub fn lifecycle_flag(
    corpus: &Corpus,
    account_id: &str,
    event_id: &str,
    config: &LifecycleConfig,
) -> Result<LifecycleFlag, ScreenError> {
    let account = corpus
        .account(account_id)
        .ok_or_else(|| ScreenError::UnknownAccount(account_id.to_string()))?;
    let event = corpus
        .event(event_id)
        .ok_or_else(|| ScreenError::UnknownEvent(event_id.to_string()))?;

    let t_ref = match config.reference {
        TimingReference::TEvent => event.t_ref(),
        TimingReference::TResolve => event.first_resolve,
    };
    let created_at = account.effective_created_at();
    let window = days_to_duration(config.window_days);
    let timing_ok = created_at.is_some_and(|c| c >= t_ref - window && c <= t_ref);

    let mut profit = Decimal::ZERO;
    let mut inside = Decimal::ZERO;
    let mut total = Decimal::ZERO;
    let mut dormancy_ok = true;
    for t in corpus.account_trades(account_id) {
        let market = corpus
            .market(&t.market_id)
            .expect("validated corpus references known markets");
        total += t.notional();
        if market.event_id == event_id {
            inside += t.notional();
            profit += t.resolution_pnl(market.outcome);
        }
        if t.ts > event.last_resolve {
            dormancy_ok = false;
        }
    }
    let external_volume_fraction = if total.is_zero() {
        0.0
    } else {
        ((total - inside) / total).to_f64().unwrap_or(1.0)
    };
    let exclusivity_ok = external_volume_fraction <= config.max_external_volume_fraction;
    let volume_ok = inside >= config.min_volume;
    let profit_ok = profit >= config.min_profit;

    Ok(LifecycleFlag {
        account_id: account_id.to_string(),
        event_id: event_id.to_string(),
        flagged: timing_ok && dormancy_ok && exclusivity_ok && volume_ok && profit_ok,
        timing_ok,
        dormancy_ok,
        exclusivity_ok,
        volume_ok,
        profit_ok,
        realized_profit: profit,
        gross_volume: inside,
        external_volume_fraction,
        t_ref,
        created_at,
    })
}

/// Screens every (account, event) pair in which the account traded.
pub fn lifecycle_scan(corpus: &Corpus, config: &LifecycleConfig) -> Vec<LifecycleFlag> {
    let pairs: Vec<(&str, String)> = corpus
        .account_ids()
        .into_iter()
        .flat_map(|a| {
            let events: BTreeSet<String> = corpus
                .account_trades(a)
                .iter()
                .map(|t| corpus.market(&t.market_id).unwrap().event_id.clone())
                .collect();
            events.into_iter().map(move |e| (a, e))
        })
        .collect();
    par_map(&pairs, |(a, e)| {
        lifecycle_flag(corpus, a, e, config).expect("ids come from the corpus")
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Category, Outcome, Side};
    use crate::testkit::{day, Kit};
    use proptest::prelude::*;
    use rust_decimal_macros::dec;

    /// One YES market (event day 10, resolve day 20) and an account created on
    /// day `created` that buys `size` at 0.5.
    fn kit(created: i64, size: Decimal) -> Kit {
        let mut k = Kit::new();
        k.market("m", "e", Category::Politics, Outcome::Yes);
        k.account("a", Some(day(created)));
        k.trade("a", "m", Side::Buy, size, dec!(0.5), day(created.max(0) + 1));
        k
    }

    #[test]
    fn profit_just_below_threshold_is_not_flagged() {
        // 1999.98 shares at 0.5: volume 999.99, profit 999.99
        let mut k = kit(5, dec!(1999.98));
        k.trade("a", "m", Side::Buy, dec!(2.02), dec!(0.5), day(6));
        // volume 1001.00 now passes; profit 1001.00 too
        let c = k.build();
        assert!(lifecycle_flag(&c, "a", "e", &LifecycleConfig::default()).unwrap().flagged);

        let mut k = kit(5, dec!(4000));
        // a losing hedge brings profit to exactly 999.99
        k.trade("a", "m", Side::Sell, dec!(1000.01), dec!(0.0), day(6));
        let f = lifecycle_flag(&k.build(), "a", "e", &LifecycleConfig::default()).unwrap();
        assert_eq!(f.realized_profit, dec!(999.99));
        assert!(f.volume_ok && f.timing_ok && f.dormancy_ok && f.exclusivity_ok);
        assert!(!f.profit_ok);
        assert!(!f.flagged);
    }

    #[test]
    fn old_account_fails_timing() {
        let k = kit(-10, dec!(10_000));
        let f = lifecycle_flag(&k.build(), "a", "e", &LifecycleConfig::default()).unwrap();
        assert!(!f.timing_ok);
        assert!(!f.flagged);
    }

    #[test]
    fn trading_after_resolution_breaks_dormancy() {
        let mut k = kit(5, dec!(10_000));
        k.market("m2", "e2", Category::Sports, Outcome::No);
        k.raw.markets[1].t_resolve = day(40);
        k.trade("a", "m2", Side::Buy, dec!(1), dec!(0.01), day(25));
        let f = lifecycle_flag(&k.build(), "a", "e", &LifecycleConfig::default()).unwrap();
        assert!(!f.dormancy_ok);
        assert!(!f.exclusivity_ok);
    }

    #[test]
    fn unknown_ids_are_errors() {
        let c = kit(5, dec!(10)).build();
        assert!(matches!(lifecycle_flag(&c, "x", "e", &LifecycleConfig::default()), Err(ScreenError::UnknownAccount(_))));
        assert!(matches!(lifecycle_flag(&c, "a", "x", &LifecycleConfig::default()), Err(ScreenError::UnknownEvent(_))));
    }

    #[test]
    fn creation_falls_back_to_first_trade() {
        let mut k = Kit::new();
        k.market("m", "e", Category::Politics, Outcome::Yes);
        k.trade("a", "m", Side::Buy, dec!(10_000), dec!(0.5), day(8));
        let f = lifecycle_flag(&k.build(), "a", "e", &LifecycleConfig::default()).unwrap();
        assert_eq!(f.created_at, Some(day(8)));
        assert!(f.flagged);
    }

    fn strictness() -> impl Strategy<Value = (LifecycleConfig, LifecycleConfig)> {
        (
            1.0f64..20.0,
            0i64..5000,
            0i64..5000,
            0.0f64..0.5,
            0.0f64..1.0,
            0i64..3000,
            0i64..3000,
            0.0f64..0.5,
        )
            .prop_map(|(w, v, p, x, dw, dv, dp, dx)| {
                let loose = LifecycleConfig {
                    window_days: w,
                    min_volume: Decimal::from(v),
                    min_profit: Decimal::from(p),
                    max_external_volume_fraction: x + dx.min(0.5),
                    reference: TimingReference::TEvent,
                };
                let strict = LifecycleConfig {
                    window_days: w * (1.0 - dw * 0.9),
                    min_volume: Decimal::from(v + dv),
                    min_profit: Decimal::from(p + dp),
                    max_external_volume_fraction: x,
                    reference: TimingReference::TEvent,
                };
                (loose, strict)
            })
    }

    proptest! {
        #[test]
        fn stricter_config_never_adds_flags((loose, strict) in strictness(), seed in 0u64..1000) {
            let mut k = Kit::new();
            k.market("m", "e", Category::Politics, Outcome::Yes);
            k.market("m2", "e2", Category::Politics, Outcome::No);
            for i in 0..8u64 {
                let a = format!("a{i}");
                let created = ((seed + i * 7) % 12) as i64;
                k.account(&a, Some(day(created)));
                let size = Decimal::from(500 + (seed * 31 + i * 977) % 6000);
                k.trade(&a, "m", Side::Buy, size, dec!(0.4), day(created + 1).min(day(19)));
                if (seed + i) % 3 == 0 {
                    k.trade(&a, "m2", Side::Sell, Decimal::from(100 + i * 50), dec!(0.3), day(created + 2));
                }
            }
            let c = k.build();
            let loose_flags: BTreeSet<_> = lifecycle_scan(&c, &loose).into_iter().filter(|f| f.flagged).map(|f| (f.account_id, f.event_id)).collect();
            let strict_flags: BTreeSet<_> = lifecycle_scan(&c, &strict).into_iter().filter(|f| f.flagged).map(|f| (f.account_id, f.event_id)).collect();
            prop_assert!(strict_flags.is_subset(&loose_flags));
        }
    }
}
