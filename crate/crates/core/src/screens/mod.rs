//! Wallet screens for accounts the skill classifier cannot reach:
//! the single-event lifecycle-and-conviction heuristic, flagged-account
//! order imbalance, and a composite per-market anomaly score.

mod composite;
mod imbalance;
mod lifecycle;

use thiserror::Error;

pub use composite::{composite_score, CompositeConfig, CompositeFeatures, CompositeScore, CompositeWeights};
pub use imbalance::{
    imbalance_observations, imbalance_predictiveness, insider_order_imbalance, predictiveness_from,
    PeriodObservation, Predictiveness, MIN_PERIODS,
};
pub use lifecycle::{lifecycle_flag, lifecycle_scan, LifecycleConfig, LifecycleFlag, TimingReference};

#[derive(Debug, Error)]
pub enum ScreenError {
    #[error("unknown account `{0}`")]
    UnknownAccount(String),
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
    #[error("unknown market `{0}`")]
    UnknownMarket(String),
    #[error("market `{market_id}` has {active} active account(s); need at least 2")]
    InsufficientPopulation { market_id: String, active: usize },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}
