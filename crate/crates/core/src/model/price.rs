use rust_decimal::prelude::ToPrimitive;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use super::types::{PricePoint, Timestamp, Trade};
use super::ModelError;

/// Step-interpolated price path of one market.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriceSeries {
    pub market_id: String,
    points: Vec<PricePoint>,
}

impl PriceSeries {
    /// Builds a series from points with strictly increasing timestamps.
    pub fn new(market_id: impl Into<String>, points: Vec<PricePoint>) -> Result<Self, ModelError> {
        let market_id = market_id.into();
        if points.is_empty() {
            return Err(ModelError::EmptySeries(market_id));
        }
        if let Some(w) = points.windows(2).find(|w| w[1].ts <= w[0].ts) {
            return Err(ModelError::NonIncreasingSeries {
                market_id,
                ts: w[1].ts,
            });
        }
        if let Some(p) = points
            .iter()
            .find(|p| p.price < Decimal::ZERO || p.price > Decimal::ONE)
        {
            return Err(ModelError::PriceOutOfRange {
                market_id,
                price: p.price,
            });
        }
        Ok(Self { market_id, points })
    }

    /// Last-trade-price series from a market's trade prints.
    ///
    /// Prints sharing a timestamp collapse to the last one in input order.
    pub fn from_trades<'a>(
        market_id: impl Into<String>,
        trades: impl IntoIterator<Item = &'a Trade>,
    ) -> Result<Self, ModelError> {
        let mut prints: Vec<&Trade> = trades.into_iter().collect();
        prints.sort_by_key(|p| p.ts);
        let mut points: Vec<PricePoint> = Vec::with_capacity(prints.len());
        for t in prints {
            match points.last_mut() {
                Some(last) if last.ts == t.ts => last.price = t.price,
                _ => points.push(PricePoint {
                    ts: t.ts,
                    price: t.price,
                }),
            }
        }
        Self::new(market_id, points)
    }

    pub fn points(&self) -> &[PricePoint] {
        &self.points
    }

    pub fn start(&self) -> Timestamp {
        self.points[0].ts
    }

    pub fn end(&self) -> Timestamp {
        self.points[self.points.len() - 1].ts
    }

    /// Exact price of the last point at or before `t`.
    pub fn price_at_exact(&self, t: Timestamp) -> Result<Decimal, ModelError> {
        let idx = self.points.partition_point(|p| p.ts <= t);
        if idx == 0 {
            return Err(ModelError::TimeBeforeSeries {
                market_id: self.market_id.clone(),
                t,
                start: self.start(),
            });
        }
        Ok(self.points[idx - 1].price)
    }

    /// Right-continuous step lookup as a probability.
    pub fn price_at(&self, t: Timestamp) -> Result<f64, ModelError> {
        self.price_at_exact(t)
            .map(|p| p.to_f64().expect("price in [0,1] converts"))
    }

    /// `1 - p` at every point.
    pub fn complement(&self) -> PriceSeries {
        PriceSeries {
            market_id: self.market_id.clone(),
            points: self
                .points
                .iter()
                .map(|p| PricePoint {
                    ts: p.ts,
                    price: Decimal::ONE - p.price,
                })
                .collect(),
        }
    }
}
