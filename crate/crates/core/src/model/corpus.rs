use std::collections::{BTreeMap, BTreeSet};

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use super::price::PriceSeries;
use super::types::{Account, Category, Event, FundingTag, Market, PricePoint, Timestamp, Trade};
use super::validate::{validate_corpus, ValidationReport};
use super::ModelError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceRecord {
    pub market_id: String,
    pub ts: Timestamp,
    pub price: Decimal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccountRecord {
    pub account_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_at: Option<Timestamp>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub funding_tag: Option<FundingTag>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventRecord {
    pub event_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_event: Option<Timestamp>,
}

/// Unvalidated corpus contents as read from files or produced by a generator.
///
/// `accounts` and `events` are optional; when absent they are derived from
/// trades and markets.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawCorpus {
    pub markets: Vec<Market>,
    pub trades: Vec<Trade>,
    pub prices: Vec<PriceRecord>,
    pub accounts: Option<Vec<AccountRecord>>,
    pub events: Option<Vec<EventRecord>>,
}

/// One row of an account's per-event profit table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventPnl {
    pub event_id: String,
    pub pnl: Decimal,
    pub gross_volume: Decimal,
}

/// Restricts which trades enter an event aggregation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventFilter {
    pub category: Option<Category>,
    pub events: Option<BTreeSet<String>>,
}

impl EventFilter {
    pub fn all() -> Self {
        Self::default()
    }

    pub fn category(category: Category) -> Self {
        Self {
            category: Some(category),
            events: None,
        }
    }

    pub fn events(events: BTreeSet<String>) -> Self {
        Self {
            category: None,
            events: Some(events),
        }
    }

    pub fn admits(&self, market: &Market) -> bool {
        self.category.is_none_or(|c| market.category == c)
            && self
                .events
                .as_ref()
                .is_none_or(|set| set.contains(&market.event_id))
    }
}

/// Validated, indexed, immutable corpus.
#[derive(Debug, Clone)]
pub struct Corpus {
    markets: BTreeMap<String, Market>,
    events: BTreeMap<String, Event>,
    accounts: BTreeMap<String, Account>,
    /// Sorted by (account_id, ts, trade_id).
    trades: Vec<Trade>,
    account_ranges: BTreeMap<String, (usize, usize)>,
    /// Indices into `trades`, sorted by (ts, trade_id).
    market_trades: BTreeMap<String, Vec<usize>>,
    prices: BTreeMap<String, PriceSeries>,
    derived_prices: BTreeSet<String>,
    report: ValidationReport,
}

impl Corpus {
    /// Validates and indexes a raw corpus.
    ///
    /// Missing price series are derived from trade prints; missing account
    /// and event records are derived from trades and markets.
    pub fn build(raw: RawCorpus) -> Result<Corpus, ModelError> {
        let report = validate_corpus(&raw);
        if !report.accepted() {
            return Err(ModelError::ValidationFailed(report));
        }
        let RawCorpus {
            markets,
            mut trades,
            prices,
            accounts,
            events,
        } = raw;

        let markets: BTreeMap<String, Market> = markets
            .into_iter()
            .map(|m| (m.market_id.clone(), m))
            .collect();

        trades.sort_by(|a, b| {
            (&a.account_id, a.ts, &a.trade_id).cmp(&(&b.account_id, b.ts, &b.trade_id))
        });
        let mut account_ranges: BTreeMap<String, (usize, usize)> = BTreeMap::new();
        let mut market_trades: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, t) in trades.iter().enumerate() {
            account_ranges
                .entry(t.account_id.clone())
                .and_modify(|r| r.1 = i + 1)
                .or_insert((i, i + 1));
            market_trades.entry(t.market_id.clone()).or_default().push(i);
        }
        for idx in market_trades.values_mut() {
            idx.sort_by(|&a, &b| (trades[a].ts, &trades[a].trade_id).cmp(&(trades[b].ts, &trades[b].trade_id)));
        }

        let mut listed: BTreeMap<String, AccountRecord> = accounts
            .unwrap_or_default()
            .into_iter()
            .map(|a| (a.account_id.clone(), a))
            .collect();
        for id in account_ranges.keys() {
            listed.entry(id.clone()).or_insert_with(|| AccountRecord {
                account_id: id.clone(),
                created_at: None,
                funding_tag: None,
            });
        }
        let accounts = listed
            .into_iter()
            .map(|(id, rec)| {
                let (first, last) = match account_ranges.get(&id) {
                    Some(&(lo, hi)) => (Some(trades[lo].ts), Some(trades[hi - 1].ts)),
                    None => (None, None),
                };
                let account = Account {
                    account_id: id.clone(),
                    created_at: rec.created_at,
                    funding_tag: rec.funding_tag,
                    first_trade_ts: first,
                    last_trade_ts: last,
                };
                (id, account)
            })
            .collect();

        let event_records: BTreeMap<String, Option<Timestamp>> = match events {
            Some(list) => list.into_iter().map(|e| (e.event_id, e.t_event)).collect(),
            None => markets
                .values()
                .map(|m| (m.event_id.clone(), None))
                .collect(),
        };
        let mut events = BTreeMap::new();
        for (event_id, t_event) in event_records {
            let members: Vec<&Market> = markets
                .values()
                .filter(|m| m.event_id == event_id)
                .collect();
            if members.is_empty() {
                continue;
            }
            let member_event = members.iter().filter_map(|m| m.t_event).min();
            let event = Event {
                event_id: event_id.clone(),
                market_ids: members.iter().map(|m| m.market_id.clone()).collect(),
                t_event: t_event.or(member_event),
                first_resolve: members.iter().map(|m| m.t_resolve).min().unwrap(),
                last_resolve: members.iter().map(|m| m.t_resolve).max().unwrap(),
            };
            events.insert(event_id, event);
        }

        let mut grouped: BTreeMap<String, Vec<PricePoint>> = BTreeMap::new();
        for p in prices {
            grouped.entry(p.market_id).or_default().push(PricePoint {
                ts: p.ts,
                price: p.price,
            });
        }
        let mut series = BTreeMap::new();
        for (market_id, points) in grouped {
            series.insert(market_id.clone(), PriceSeries::new(market_id, points)?);
        }
        let mut derived_prices = BTreeSet::new();
        for (market_id, idx) in &market_trades {
            if !series.contains_key(market_id) {
                let s = PriceSeries::from_trades(market_id.clone(), idx.iter().map(|&i| &trades[i]))?;
                series.insert(market_id.clone(), s);
                derived_prices.insert(market_id.clone());
            }
        }

        Ok(Corpus {
            markets,
            events,
            accounts,
            trades,
            account_ranges,
            market_trades,
            prices: series,
            derived_prices,
            report,
        })
    }

    /// Warnings raised while building.
    pub fn validation(&self) -> &ValidationReport {
        &self.report
    }

    pub fn markets(&self) -> impl Iterator<Item = &Market> {
        self.markets.values()
    }

    pub fn market(&self, market_id: &str) -> Option<&Market> {
        self.markets.get(market_id)
    }

    pub fn events(&self) -> impl Iterator<Item = &Event> {
        self.events.values()
    }

    pub fn event(&self, event_id: &str) -> Option<&Event> {
        self.events.get(event_id)
    }

    pub fn accounts(&self) -> impl Iterator<Item = &Account> {
        self.accounts.values()
    }

    pub fn account(&self, account_id: &str) -> Option<&Account> {
        self.accounts.get(account_id)
    }

    pub fn account_ids(&self) -> Vec<&str> {
        self.accounts.keys().map(String::as_str).collect()
    }

    pub fn trades(&self) -> &[Trade] {
        &self.trades
    }

    /// The account's trades, sorted by time. Empty for unknown accounts.
    pub fn account_trades(&self, account_id: &str) -> &[Trade] {
        match self.account_ranges.get(account_id) {
            Some(&(lo, hi)) => &self.trades[lo..hi],
            None => &[],
        }
    }

    /// The market's trades, sorted by time.
    pub fn market_trades<'a>(&'a self, market_id: &str) -> impl Iterator<Item = &'a Trade> + 'a {
        self.market_trades
            .get(market_id)
            .map(|v| v.as_slice())
            .unwrap_or(&[])
            .iter()
            .map(|&i| &self.trades[i])
    }

    pub fn price_series(&self, market_id: &str) -> Option<&PriceSeries> {
        self.prices.get(market_id)
    }

    pub fn price_series_all(&self) -> impl Iterator<Item = &PriceSeries> {
        self.prices.values()
    }

    /// Whether the market's series was derived from trade prints.
    pub fn is_price_derived(&self, market_id: &str) -> bool {
        self.derived_prices.contains(market_id)
    }

    /// Per-event PnL and gross volume over every trade of the account.
    pub fn event_pnl_table(&self, account_id: &str) -> Result<Vec<EventPnl>, ModelError> {
        self.event_pnl_table_filtered(account_id, &EventFilter::all())
    }

    /// Per-event PnL restricted to markets admitted by `filter`.
    ///
    /// Rows are sorted by event id.
    pub fn event_pnl_table_filtered(
        &self,
        account_id: &str,
        filter: &EventFilter,
    ) -> Result<Vec<EventPnl>, ModelError> {
        if !self.accounts.contains_key(account_id) {
            return Err(ModelError::UnknownAccount(account_id.to_string()));
        }
        let mut rows: BTreeMap<&str, (Decimal, Decimal)> = BTreeMap::new();
        for t in self.account_trades(account_id) {
            let market = &self.markets[&t.market_id];
            if !filter.admits(market) {
                continue;
            }
            let row = rows.entry(market.event_id.as_str()).or_default();
            row.0 += t.resolution_pnl(market.outcome);
            row.1 += t.notional();
        }
        Ok(rows
            .into_iter()
            .map(|(event_id, (pnl, gross_volume))| EventPnl {
                event_id: event_id.to_string(),
                pnl,
                gross_volume,
            })
            .collect())
    }

    /// Distinct markets the account traded.
    pub fn account_markets(&self, account_id: &str) -> BTreeSet<&str> {
        self.account_trades(account_id)
            .iter()
            .map(|t| t.market_id.as_str())
            .collect()
    }

    /// Reassembles the raw contents, with every derived record made explicit.
    pub fn to_raw(&self) -> RawCorpus {
        let mut trades = self.trades.clone();
        trades.sort_by(|a, b| (a.ts, &a.trade_id).cmp(&(b.ts, &b.trade_id)));
        RawCorpus {
            markets: self.markets.values().cloned().collect(),
            trades,
            prices: self
                .prices
                .values()
                .flat_map(|s| {
                    s.points().iter().map(|p| PriceRecord {
                        market_id: s.market_id.clone(),
                        ts: p.ts,
                        price: p.price,
                    })
                })
                .collect(),
            accounts: Some(
                self.accounts
                    .values()
                    .map(|a| AccountRecord {
                        account_id: a.account_id.clone(),
                        created_at: a.created_at,
                        funding_tag: a.funding_tag,
                    })
                    .collect(),
            ),
            events: Some(
                self.events
                    .values()
                    .map(|e| EventRecord {
                        event_id: e.event_id.clone(),
                        t_event: e.t_event,
                    })
                    .collect(),
            ),
        }
    }
}
