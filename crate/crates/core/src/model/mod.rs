//! Corpus data model: trades, markets, events, accounts, price paths, and
//! resolution-PnL accounting.

mod corpus;
mod price;
mod types;
mod validate;

use rust_decimal::Decimal;
use thiserror::Error;

pub use corpus::{AccountRecord, Corpus, EventFilter, EventPnl, EventRecord, PriceRecord, RawCorpus};
pub use price::PriceSeries;
pub use types::{
    days_to_duration, seconds_to_days, Account, Category, Event, FundingTag, Market, Outcome,
    PricePoint, Side, Timestamp, Trade,
};
pub use validate::{validate_corpus, Severity, ValidationReport, Violation, ViolationCode};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("time {t} precedes the first price point {start} of market `{market_id}`")]
    TimeBeforeSeries {
        market_id: String,
        t: Timestamp,
        start: Timestamp,
    },
    #[error("price series for market `{0}` is empty")]
    EmptySeries(String),
    #[error("price series for market `{market_id}` is not strictly increasing at {ts}")]
    NonIncreasingSeries { market_id: String, ts: Timestamp },
    #[error("price {price} outside [0,1] in market `{market_id}`")]
    PriceOutOfRange { market_id: String, price: Decimal },
    #[error("unknown account `{0}`")]
    UnknownAccount(String),
    #[error("unknown market `{0}`")]
    UnknownMarket(String),
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
    #[error("corpus validation failed: {0}")]
    ValidationFailed(ValidationReport),
}

/// Resolution PnL of a single trade; see [`Trade::resolution_pnl`].
pub fn trade_resolution_pnl(trade: &Trade, outcome: Outcome) -> Decimal {
    trade.resolution_pnl(outcome)
}
