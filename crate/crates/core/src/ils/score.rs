use chrono::Duration;
use rust_decimal::prelude::ToPrimitive;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::model::{Market, ModelError, Outcome, PriceSeries, Timestamp};

use super::IlsError;

/// Slack for float comparisons against gate bounds.
const GATE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IlsParams {
    /// Minimum |outcome - p_open|.
    pub epsilon: f64,
    /// Maximum |p_open - 0.5|.
    pub edge_bound: f64,
    /// Perturbations of the event time, in minutes.
    pub anchor_grid_minutes: Vec<i64>,
    /// Maximum absolute change of the score across the grid.
    pub eta: f64,
    /// Lead before the event time for the pre-event price, in seconds.
    pub pre_event_lead_secs: i64,
    pub short_window_hours: f64,
}

impl Default for IlsParams {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            edge_bound: 0.4,
            anchor_grid_minutes: vec![-10, -5, -2, -1, 1, 2, 5, 10],
            eta: 0.05,
            pre_event_lead_secs: 60,
            short_window_hours: 48.0,
        }
    }
}

impl IlsParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.epsilon >= 0.0) || !(self.eta >= 0.0) || !(self.edge_bound >= 0.0) {
            return Err("ils.epsilon, ils.eta and ils.edge_bound must be >= 0".into());
        }
        if self.pre_event_lead_secs < 0 {
            return Err("ils.pre_event_lead_secs must be >= 0".into());
        }
        if !(self.short_window_hours > 0.0) {
            return Err("ils.short_window_hours must be > 0".into());
        }
        Ok(())
    }

    fn lead(&self) -> Duration {
        Duration::seconds(self.pre_event_lead_secs)
    }

    fn short_window(&self) -> Duration {
        Duration::seconds((self.short_window_hours * 3600.0).round() as i64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScopeGateReport {
    pub p_open: f64,
    pub delta_total: f64,
    pub edge_effect_ok: bool,
    pub nontrivial_move_ok: bool,
    pub anchor_stable_ok: bool,
    pub epsilon: f64,
    pub eta: f64,
    /// Largest |score(t_event + d) - score(t_event)| over the grid; absent
    /// when the terminal move is exactly zero.
    pub max_anchor_deviation: Option<f64>,
    pub admitted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum IlsRegime {
    Negative,
    UnitInterval,
    OverUnity,
}

impl IlsRegime {
    pub fn of(value: f64) -> IlsRegime {
        if value < 0.0 {
            IlsRegime::Negative
        } else if value > 1.0 {
            IlsRegime::OverUnity
        } else {
            IlsRegime::UnitInterval
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IlsResult {
    pub market_id: String,
    pub t_event: Timestamp,
    pub p_open: f64,
    pub p_pre: f64,
    pub outcome_price: u8,
    pub delta_pre: f64,
    pub delta_total: f64,
    pub ils_dl: f64,
    pub regime: IlsRegime,
    pub short_window_value: Option<f64>,
    pub gate: ScopeGateReport,
}

fn lookup(series: &PriceSeries, t: Timestamp) -> Result<Decimal, IlsError> {
    series.price_at_exact(t).map_err(|e| match e {
        ModelError::TimeBeforeSeries { market_id, t, start } => IlsError::SeriesGap { market_id, t, start },
        other => IlsError::Model(other),
    })
}

fn to_f64(d: Decimal) -> f64 {
    d.to_f64().expect("finite decimal")
}

/// `(p(upper) - p(lower)) / (outcome - p_open)`, exact in decimal arithmetic.
fn move_ratio(
    series: &PriceSeries,
    market: &Market,
    lower: Timestamp,
    upper: Timestamp,
) -> Result<Option<Decimal>, IlsError> {
    let p_open = lookup(series, market.t_open)?;
    let total = market.outcome.price() - p_open;
    if total.is_zero() {
        return Ok(None);
    }
    let num = lookup(series, upper)? - lookup(series, lower)?;
    Ok(Some(num / total))
}

fn event_time(market: &Market) -> Result<Timestamp, IlsError> {
    market
        .t_event
        .ok_or_else(|| IlsError::MissingEventTime(market.market_id.clone()))
}

/// Deadline score with the public event placed at `anchor`:
/// `(p(anchor - lead) - p(t_open)) / (outcome - p(t_open))`.
///
/// Used for proxy anchors (for example resolution minus one hour) as well
/// as the event time itself.
pub fn ils_at_anchor(
    series: &PriceSeries,
    market: &Market,
    anchor: Timestamp,
    params: &IlsParams,
) -> Result<f64, IlsError> {
    move_ratio(series, market, market.t_open, anchor - params.lead())?
        .map(to_f64)
        .ok_or_else(|| IlsError::ZeroTerminalMove(market.market_id.clone()))
}

/// Evaluates the edge-effect, non-trivial-move, and anchor-stability
/// conditions.
pub fn scope_gate(
    series: &PriceSeries,
    market: &Market,
    params: &IlsParams,
) -> Result<ScopeGateReport, IlsError> {
    let t_event = event_time(market)?;
    let p_open = to_f64(lookup(series, market.t_open)?);
    let delta_total = market.outcome.bit() as f64 - p_open;
    let edge_effect_ok = (p_open - 0.5).abs() <= params.edge_bound + GATE_SLACK;
    let nontrivial_move_ok = delta_total.abs() + GATE_SLACK >= params.epsilon;

    let central = move_ratio(series, market, market.t_open, t_event - params.lead())?;
    let max_anchor_deviation = match central {
        None => None,
        Some(c) => {
            let mut worst = 0.0f64;
            for &m in &params.anchor_grid_minutes {
                let anchor = t_event + Duration::minutes(m) - params.lead();
                let v = move_ratio(series, market, market.t_open, anchor)?
                    .expect("nonzero terminal move");
                worst = worst.max(to_f64((v - c).abs()));
            }
            Some(worst)
        }
    };
    let anchor_stable_ok = max_anchor_deviation.is_some_and(|d| d <= params.eta + GATE_SLACK);
    Ok(ScopeGateReport {
        p_open,
        delta_total,
        edge_effect_ok,
        nontrivial_move_ok,
        anchor_stable_ok,
        epsilon: params.epsilon,
        eta: params.eta,
        max_anchor_deviation,
        admitted: edge_effect_ok && nontrivial_move_ok && anchor_stable_ok,
    })
}

fn short_window_unchecked(
    series: &PriceSeries,
    market: &Market,
    t_event: Timestamp,
    window: Duration,
    params: &IlsParams,
) -> Result<f64, IlsError> {
    let lower = (t_event - window).max(market.t_open);
    move_ratio(series, market, lower, t_event - params.lead())?
        .map(to_f64)
        .ok_or_else(|| IlsError::ZeroTerminalMove(market.market_id.clone()))
}

/// Deadline information-leakage score of an admitted market.
pub fn ils_dl(series: &PriceSeries, market: &Market, params: &IlsParams) -> Result<IlsResult, IlsError> {
    let gate = scope_gate(series, market, params)?;
    if !gate.admitted {
        return Err(IlsError::NotAdmitted(Box::new(gate)));
    }
    let t_event = event_time(market)?;
    let p_open = lookup(series, market.t_open)?;
    let p_pre = lookup(series, t_event - params.lead())?;
    let total = market.outcome.price() - p_open;
    let score = (p_pre - p_open) / total;
    let ils = to_f64(score);
    let short = short_window_unchecked(series, market, t_event, params.short_window(), params)?;
    Ok(IlsResult {
        market_id: market.market_id.clone(),
        t_event,
        p_open: to_f64(p_open),
        p_pre: to_f64(p_pre),
        outcome_price: market.outcome.bit(),
        delta_pre: to_f64(p_pre - p_open),
        delta_total: to_f64(total),
        ils_dl: ils,
        regime: IlsRegime::of(ils),
        short_window_value: Some(short),
        gate,
    })
}

/// Pre-event move inside the last `window` over the total move, for an
/// admitted market. The lower anchor never precedes the open.
pub fn short_window_ils(
    series: &PriceSeries,
    market: &Market,
    window: Duration,
    params: &IlsParams,
) -> Result<f64, IlsError> {
    let gate = scope_gate(series, market, params)?;
    if !gate.admitted {
        return Err(IlsError::NotAdmitted(Box::new(gate)));
    }
    short_window_unchecked(series, market, event_time(market)?, window, params)
}

/// Complement view of a market: prices `1 - p` and the opposite outcome.
pub fn complement_market(series: &PriceSeries, market: &Market) -> (PriceSeries, Market) {
    let mut m = market.clone();
    m.outcome = match market.outcome {
        Outcome::Yes => Outcome::No,
        Outcome::No => Outcome::Yes,
    };
    (series.complement(), m)
}
