//! Sign-randomization skill classifier.
//!
//! Holding every trade fixed in event, market, size, price and timing, the
//! null flips the direction of all of an account's trades within an event
//! together. Because each trade is marked to resolution, an event's PnL is
//! linear in direction and the simulated account PnL is `sum_e s_e * pnl_e`.

mod classify;
mod market_maker;
mod null;
mod persistence;

use thiserror::Error;

pub use classify::{
    classify_account, classify_accounts, AccountClassification, ClassifyScope, SkillCategory,
    DEGENERACY_TOLERANCE, SKILLED_MAX_P, UNSKILLED_MIN_P,
};
pub use market_maker::{detect_market_maker, market_maker_stats, MarketMakerConfig, MarketMakerStats};
pub use null::{
    exact_p_value, monte_carlo_p_value, null_p_value, simulate_null, stream_seed, NullOutcome,
    NullSpec, NullSummary, PValueMethod, EXACT_HARD_LIMIT, EXACT_MAX_EVENTS,
};
pub use persistence::{persistence_retention, PersistenceResult};

#[derive(Debug, Error)]
pub enum SignRandError {
    #[error("account has no event history")]
    EmptyHistory,
    #[error("unknown account `{0}`")]
    UnknownAccount(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("{0} events is too many for exact enumeration")]
    TooManyEventsForExact(usize),
}
