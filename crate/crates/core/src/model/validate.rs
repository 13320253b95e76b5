use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use super::corpus::RawCorpus;
use super::types::Timestamp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Fatal,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationCode {
    DuplicateId,
    UnknownMarket,
    UnknownEvent,
    UnknownAccount,
    PriceOutOfRange,
    NegativeSize,
    TradeOutsideMarketLife,
    OpenAfterResolve,
    EventTimeOutsideMarketLife,
    DeadlineBeforeOpen,
    CreatedAfterFirstTrade,
    NonIncreasingPriceSeries,
    PriceBeforeOpen,
    EmptyEvent,
    EventTimeMismatch,
    MissingEventTime,
    MissingCreatedAt,
    DerivedAccount,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub severity: Severity,
    pub code: ViolationCode,
    pub subject: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn accepted(&self) -> bool {
        self.fatal().next().is_none()
    }

    pub fn fatal(&self) -> impl Iterator<Item = &Violation> {
        self.violations
            .iter()
            .filter(|v| v.severity == Severity::Fatal)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Violation> {
        self.violations
            .iter()
            .filter(|v| v.severity == Severity::Warning)
    }

    pub fn has(&self, code: ViolationCode) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }

    fn push(&mut self, severity: Severity, code: ViolationCode, subject: &str, message: String) {
        self.violations.push(Violation {
            severity,
            code,
            subject: subject.to_string(),
            message,
        });
    }

    fn fatal_at(&mut self, code: ViolationCode, subject: &str, message: String) {
        self.push(Severity::Fatal, code, subject, message);
    }

    fn warn_at(&mut self, code: ViolationCode, subject: &str, message: String) {
        self.push(Severity::Warning, code, subject, message);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fatal = self.fatal().count();
        let warn = self.warnings().count();
        write!(f, "{fatal} fatal violation(s), {warn} warning(s)")?;
        for v in self.fatal().take(10) {
            write!(f, "\n  {:?} {}: {}", v.code, v.subject, v.message)?;
        }
        Ok(())
    }
}

/// Checks every type invariant and cross-reference of a raw corpus.
pub fn validate_corpus(raw: &RawCorpus) -> ValidationReport {
    let mut report = ValidationReport::default();

    let mut markets = BTreeMap::new();
    for m in &raw.markets {
        if markets.insert(m.market_id.as_str(), m).is_some() {
            report.fatal_at(
                ViolationCode::DuplicateId,
                &m.market_id,
                "market id appears more than once".into(),
            );
        }
        if m.t_open > m.t_resolve {
            report.fatal_at(
                ViolationCode::OpenAfterResolve,
                &m.market_id,
                format!("t_open {} after t_resolve {}", m.t_open, m.t_resolve),
            );
        }
        match m.t_event {
            Some(te) if te < m.t_open || te > m.t_resolve => report.fatal_at(
                ViolationCode::EventTimeOutsideMarketLife,
                &m.market_id,
                format!("t_event {te} outside [{}, {}]", m.t_open, m.t_resolve),
            ),
            Some(_) => {}
            None => report.warn_at(
                ViolationCode::MissingEventTime,
                &m.market_id,
                "no t_event; market cannot be scored for leakage".into(),
            ),
        }
        if let Some(d) = m.t_deadline {
            if d < m.t_open {
                report.fatal_at(
                    ViolationCode::DeadlineBeforeOpen,
                    &m.market_id,
                    format!("t_deadline {d} before t_open {}", m.t_open),
                );
            }
        }
    }

    let mut event_ids: BTreeSet<&str> = BTreeSet::new();
    if let Some(events) = &raw.events {
        for e in events {
            if !event_ids.insert(e.event_id.as_str()) {
                report.fatal_at(
                    ViolationCode::DuplicateId,
                    &e.event_id,
                    "event id appears more than once".into(),
                );
            }
            let members: Vec<_> = markets
                .values()
                .filter(|m| m.event_id == e.event_id)
                .collect();
            if members.is_empty() {
                report.warn_at(
                    ViolationCode::EmptyEvent,
                    &e.event_id,
                    "event has no member markets".into(),
                );
            }
            if let Some(te) = e.t_event {
                if members.iter().any(|m| m.t_event.is_some_and(|mt| mt != te)) {
                    report.warn_at(
                        ViolationCode::EventTimeMismatch,
                        &e.event_id,
                        "member market t_event differs from event t_event".into(),
                    );
                }
            }
        }
        for m in markets.values() {
            if !event_ids.contains(m.event_id.as_str()) {
                report.fatal_at(
                    ViolationCode::UnknownEvent,
                    &m.market_id,
                    format!("references unknown event `{}`", m.event_id),
                );
            }
        }
    }

    let mut trade_ids = BTreeSet::new();
    let mut first_trade: BTreeMap<&str, Timestamp> = BTreeMap::new();
    for t in &raw.trades {
        if !trade_ids.insert(t.trade_id.as_str()) {
            report.fatal_at(
                ViolationCode::DuplicateId,
                &t.trade_id,
                "trade id appears more than once".into(),
            );
        }
        if t.price < Decimal::ZERO || t.price > Decimal::ONE {
            report.fatal_at(
                ViolationCode::PriceOutOfRange,
                &t.trade_id,
                format!("price {} outside [0,1]", t.price),
            );
        }
        if t.size < Decimal::ZERO {
            report.fatal_at(
                ViolationCode::NegativeSize,
                &t.trade_id,
                format!("size {} is negative", t.size),
            );
        }
        match markets.get(t.market_id.as_str()) {
            None => report.fatal_at(
                ViolationCode::UnknownMarket,
                &t.trade_id,
                format!("references unknown market `{}`", t.market_id),
            ),
            Some(m) if t.ts < m.t_open || t.ts > m.t_resolve => report.fatal_at(
                ViolationCode::TradeOutsideMarketLife,
                &t.trade_id,
                format!("ts {} outside [{}, {}]", t.ts, m.t_open, m.t_resolve),
            ),
            Some(_) => {}
        }
        first_trade
            .entry(t.account_id.as_str())
            .and_modify(|f| *f = (*f).min(t.ts))
            .or_insert(t.ts);
    }

    match &raw.accounts {
        Some(accounts) => {
            let mut seen = BTreeSet::new();
            for a in accounts {
                if !seen.insert(a.account_id.as_str()) {
                    report.fatal_at(
                        ViolationCode::DuplicateId,
                        &a.account_id,
                        "account id appears more than once".into(),
                    );
                }
                match (a.created_at, first_trade.get(a.account_id.as_str())) {
                    (Some(c), Some(&f)) if c > f => report.fatal_at(
                        ViolationCode::CreatedAfterFirstTrade,
                        &a.account_id,
                        format!("created_at {c} after first trade {f}"),
                    ),
                    (None, _) => report.warn_at(
                        ViolationCode::MissingCreatedAt,
                        &a.account_id,
                        "no created_at; first trade time used as creation".into(),
                    ),
                    _ => {}
                }
            }
            for id in first_trade.keys() {
                if !seen.contains(id) {
                    report.warn_at(
                        ViolationCode::DerivedAccount,
                        id,
                        "account not listed; derived from trades with first-trade creation".into(),
                    );
                }
            }
        }
        None => {
            for id in first_trade.keys() {
                report.warn_at(
                    ViolationCode::MissingCreatedAt,
                    id,
                    "no accounts file; first trade time used as creation".into(),
                );
            }
        }
    }

    let mut by_market: BTreeMap<&str, Vec<&super::corpus::PriceRecord>> = BTreeMap::new();
    for p in &raw.prices {
        by_market.entry(p.market_id.as_str()).or_default().push(p);
        if p.price < Decimal::ZERO || p.price > Decimal::ONE {
            report.fatal_at(
                ViolationCode::PriceOutOfRange,
                &p.market_id,
                format!("series price {} at {} outside [0,1]", p.price, p.ts),
            );
        }
    }
    for (market_id, points) in by_market {
        let Some(m) = markets.get(market_id) else {
            report.fatal_at(
                ViolationCode::UnknownMarket,
                market_id,
                "price series for unknown market".into(),
            );
            continue;
        };
        if points.windows(2).any(|w| w[1].ts <= w[0].ts) {
            report.fatal_at(
                ViolationCode::NonIncreasingPriceSeries,
                market_id,
                "price series timestamps must be strictly increasing".into(),
            );
        }
        if points.first().is_some_and(|p| p.ts < m.t_open) {
            report.fatal_at(
                ViolationCode::PriceBeforeOpen,
                market_id,
                format!("first price point before t_open {}", m.t_open),
            );
        }
    }

    report
}
