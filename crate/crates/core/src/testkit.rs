//! Hand-built corpora for unit tests.

use chrono::{Duration, TimeZone, Utc};
use rust_decimal::Decimal;

use crate::model::{AccountRecord, Category, Corpus, Market, Outcome, RawCorpus, Side, Timestamp, Trade};

pub fn t0() -> Timestamp {
    Utc.with_ymd_and_hms(2026, 1, 1, 0, 0, 0).unwrap()
}

pub fn day(d: i64) -> Timestamp {
    t0() + Duration::days(d)
}

#[derive(Default)]
pub struct Kit {
    pub raw: RawCorpus,
    next_trade: usize,
}

impl Kit {
    pub fn new() -> Self {
        Self::default()
    }

    /// Market `m{i}` in event `e{i}`, open day 0, event day 10, resolve day 20.
    pub fn market(&mut self, id: &str, event: &str, category: Category, outcome: Outcome) -> &mut Self {
        self.raw.markets.push(Market {
            market_id: id.into(),
            event_id: event.into(),
            category,
            t_open: day(0),
            t_deadline: None,
            t_event: Some(day(10)),
            t_resolve: day(20),
            outcome,
        });
        self
    }

    pub fn trade(&mut self, account: &str, market: &str, side: Side, size: Decimal, price: Decimal, ts: Timestamp) -> &mut Self {
        self.next_trade += 1;
        self.raw.trades.push(Trade {
            trade_id: format!("t{:06}", self.next_trade),
            account_id: account.into(),
            market_id: market.into(),
            side,
            size,
            price,
            ts,
        });
        self
    }

    pub fn account(&mut self, id: &str, created_at: Option<Timestamp>) -> &mut Self {
        self.raw
            .accounts
            .get_or_insert_with(Vec::new)
            .push(AccountRecord {
                account_id: id.into(),
                created_at,
                funding_tag: None,
            });
        self
    }

    /// `n` single-market events; the account wins `pnl` (or loses it) in each.
    pub fn events_with_pnl(&mut self, account: &str, pnls: &[i64], category: Category) -> &mut Self {
        let base = self.raw.markets.len();
        for (i, &p) in pnls.iter().enumerate() {
            let id = format!("m{}", base + i);
            self.market(&id, &format!("e{}", base + i), category, Outcome::Yes);
            // BUY at 0.5 wins 0.5/share on YES; SELL loses the same.
            let side = if p >= 0 { Side::Buy } else { Side::Sell };
            let size = Decimal::from(2 * p.abs());
            self.trade(account, &id, side, size, Decimal::new(5, 1), day(1));
        }
        self
    }

    pub fn build(&self) -> Corpus {
        Corpus::build(self.raw.clone()).expect("valid test corpus")
    }
}
