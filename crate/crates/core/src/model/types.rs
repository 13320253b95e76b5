use std::fmt;

use chrono::{DateTime, Utc};
use rust_decimal::Decimal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Timestamp = DateTime<Utc>;

/// Direction of a trade in the YES share.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Side {
    Buy,
    Sell,
}

impl Side {
    pub fn flipped(self) -> Side {
        match self {
            Side::Buy => Side::Sell,
            Side::Sell => Side::Buy,
        }
    }

    /// +1 for BUY, -1 for SELL.
    pub fn sign(self) -> Decimal {
        match self {
            Side::Buy => Decimal::ONE,
            Side::Sell => Decimal::NEGATIVE_ONE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Category {
    Politics,
    Sports,
    Crypto,
    Finance,
    Other,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::Politics,
        Category::Sports,
        Category::Crypto,
        Category::Finance,
        Category::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Politics => "POLITICS",
            Category::Sports => "SPORTS",
            Category::Crypto => "CRYPTO",
            Category::Finance => "FINANCE",
            Category::Other => "OTHER",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown category `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum FundingTag {
    Cex,
    Mixer,
    Unknown,
}

/// Binary resolution of a market. Serialized as the integer 0 or 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    No,
    Yes,
}

impl Outcome {
    pub fn from_bit(bit: u8) -> Option<Outcome> {
        match bit {
            0 => Some(Outcome::No),
            1 => Some(Outcome::Yes),
            _ => None,
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            Outcome::No => 0,
            Outcome::Yes => 1,
        }
    }

    pub fn price(self) -> Decimal {
        Decimal::from(self.bit())
    }

    pub fn complement(self) -> Outcome {
        match self {
            Outcome::No => Outcome::Yes,
            Outcome::Yes => Outcome::No,
        }
    }

    /// The side that profits when the market resolves this way.
    pub fn winning_side(self) -> Side {
        match self {
            Outcome::Yes => Side::Buy,
            Outcome::No => Side::Sell,
        }
    }
}

impl Serialize for Outcome {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_u8(self.bit())
    }
}

impl<'de> Deserialize<'de> for Outcome {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let bit = u8::deserialize(deserializer)?;
        Outcome::from_bit(bit)
            .ok_or_else(|| serde::de::Error::custom(format!("outcome must be 0 or 1, got {bit}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trade {
    pub trade_id: String,
    pub account_id: String,
    pub market_id: String,
    pub side: Side,
    pub size: Decimal,
    pub price: Decimal,
    pub ts: Timestamp,
}

impl Trade {
    /// Gross notional, `size * price`.
    pub fn notional(&self) -> Decimal {
        self.size * self.price
    }

    /// Notional signed by direction (BUY positive).
    pub fn signed_notional(&self) -> Decimal {
        self.side.sign() * self.notional()
    }

    /// Profit of this trade alone when held to resolution.
    ///
    /// Every trade is marked to the resolution price individually, so the
    /// result is linear in direction: flipping the side negates it.
    pub fn resolution_pnl(&self, outcome: Outcome) -> Decimal {
        let payoff = outcome.price();
        match self.side {
            Side::Buy => self.size * (payoff - self.price),
            Side::Sell => self.size * (self.price - payoff),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Market {
    pub market_id: String,
    pub event_id: String,
    pub category: Category,
    pub t_open: Timestamp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_deadline: Option<Timestamp>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_event: Option<Timestamp>,
    pub t_resolve: Timestamp,
    pub outcome: Outcome,
}

impl Market {
    /// `t_event - t_open` in days, when the event time is known.
    pub fn lead_time_days(&self) -> Option<f64> {
        self.t_event.map(|te| seconds_to_days((te - self.t_open).num_seconds()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub event_id: String,
    pub market_ids: Vec<String>,
    pub t_event: Option<Timestamp>,
    /// Earliest member resolution time.
    pub first_resolve: Timestamp,
    /// Latest member resolution time.
    pub last_resolve: Timestamp,
}

impl Event {
    /// Reference time: the event time when known, else the earliest member resolution.
    pub fn t_ref(&self) -> Timestamp {
        self.t_event.unwrap_or(self.first_resolve)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Account {
    pub account_id: String,
    pub created_at: Option<Timestamp>,
    pub funding_tag: Option<FundingTag>,
    pub first_trade_ts: Option<Timestamp>,
    pub last_trade_ts: Option<Timestamp>,
}

impl Account {
    /// Creation time, falling back to the first trade when creation is unknown.
    pub fn effective_created_at(&self) -> Option<Timestamp> {
        self.created_at.or(self.first_trade_ts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PricePoint {
    pub ts: Timestamp,
    pub price: Decimal,
}

pub fn seconds_to_days(secs: i64) -> f64 {
    secs as f64 / 86_400.0
}

pub fn days_to_duration(days: f64) -> chrono::Duration {
    chrono::Duration::seconds((days * 86_400.0).round() as i64)
}
