//! Browser bindings for three interactive views: the leakage score of a
//! four-segment price path, the sign-randomization null of a PnL vector, and
//! an exponential lead-time fit with its survival curve.
//!
//! Each binding returns a JSON string. The plain functions behind them are
//! public so they can be tested natively.

use chrono::{Duration, TimeZone, Utc};
use rust_decimal::prelude::{FromPrimitive, ToPrimitive};
use rust_decimal::Decimal;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use leakwatch::ils::{fit_hazard, ils_at_anchor, ils_dl, scope_gate, survival, IlsParams};
use leakwatch::model::{Category, Market, Outcome, PricePoint, PriceSeries, Timestamp};
use leakwatch::signrand::{null_p_value, simulate_null, stream_seed, NullSpec, SkillCategory, DEGENERACY_TOLERANCE};

pub const MAX_DRAWS: u32 = 200_000;
pub const MAX_BINS: usize = 200;
const STREAM_KEY: &str = "demo";

/// Path geometry, in days after the open.
pub const PRE_DAY: i64 = 5;
pub const EVENT_DAY: i64 = 10;
pub const PROXY_DAY: i64 = 12;
pub const RESOLVE_DAY: i64 = 20;

fn day(d: i64) -> Timestamp {
    Utc.with_ymd_and_hms(2026, 1, 1, 0, 0, 0).unwrap() + Duration::days(d)
}

fn price(name: &str, x: f64) -> Result<Decimal, String> {
    if !(0.0..=1.0).contains(&x) {
        return Err(format!("{name} must be in [0,1], got {x}"));
    }
    Ok(Decimal::from_f64(x).ok_or_else(|| format!("{name} is not finite"))?.round_dp(4))
}

/// Opens at `p_open`, moves to `p_pre` on day 5, to `p_proxy` on day 12 and
/// to the outcome at resolution on day 20. The event is observed on day 10;
/// the proxy anchor sits one hour before resolution.
pub fn explore_ils(p_open: f64, p_pre: f64, p_proxy: f64, outcome_yes: bool, epsilon: f64) -> Result<Value, String> {
    let outcome = if outcome_yes { Outcome::Yes } else { Outcome::No };
    let points = [
        (0, price("p_open", p_open)?),
        (PRE_DAY, price("p_pre", p_pre)?),
        (PROXY_DAY, price("p_proxy", p_proxy)?),
        (RESOLVE_DAY, outcome.price()),
    ];
    let params = IlsParams {
        epsilon,
        ..IlsParams::default()
    };
    params.validate()?;
    let series = PriceSeries::new(
        "demo",
        points.iter().map(|&(d, price)| PricePoint { ts: day(d), price }).collect(),
    )
    .map_err(|e| e.to_string())?;
    let market = Market {
        market_id: "demo".into(),
        event_id: "demo".into(),
        category: Category::Politics,
        t_open: day(0),
        t_deadline: Some(day(RESOLVE_DAY)),
        t_event: Some(day(EVENT_DAY)),
        t_resolve: day(RESOLVE_DAY),
        outcome,
    };

    let gate = scope_gate(&series, &market, &params).map_err(|e| e.to_string())?;
    let event = ils_dl(&series, &market, &params).ok();
    let proxy = ils_at_anchor(&series, &market, market.t_resolve - Duration::hours(1), &params).ok();
    let difference = match (&event, proxy) {
        (Some(e), Some(p)) => Some(e.ils_dl - p),
        _ => None,
    };
    Ok(json!({
        "path": points.iter().map(|(d, p)| json!([d, p.to_f64()])).collect::<Vec<_>>(),
        "event_day": EVENT_DAY,
        "resolve_day": RESOLVE_DAY,
        "gate": gate,
        "ils_event": event.as_ref().map(|e| e.ils_dl),
        "regime": event.as_ref().map(|e| e.regime),
        "short_window": event.as_ref().and_then(|e| e.short_window_value),
        "ils_proxy": proxy,
        "difference": difference,
    }))
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, String> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| format!("`{s}` is not a valid {what}")))
        .collect()
}

/// Sign-randomization p-value of the event PnLs in `pnls_text` plus a
/// histogram of simulated null PnLs.
pub fn null_histogram(pnls_text: &str, draws: u32, seed: u64, bins: usize) -> Result<Value, String> {
    let pnls: Vec<Decimal> = parse_list(pnls_text, "dollar amount")?;
    if pnls.is_empty() {
        return Err("enter at least one event PnL".into());
    }
    if draws == 0 || draws > MAX_DRAWS {
        return Err(format!("draws must be in 1..={MAX_DRAWS}"));
    }
    if bins == 0 || bins > MAX_BINS {
        return Err(format!("bins must be in 1..={MAX_BINS}"));
    }
    let realized: Decimal = pnls.iter().sum();
    if pnls.iter().all(|p| p.abs() < DEGENERACY_TOLERANCE) {
        return Ok(json!({ "n_events": pnls.len(), "realized": realized, "degenerate": true }));
    }
    let spec = NullSpec {
        draws,
        master_seed: seed,
        min_events: 1,
    };
    let outcome = null_p_value(&pnls, &spec, STREAM_KEY).map_err(|e| e.to_string())?;
    let sims = simulate_null(&pnls, draws, stream_seed(seed, STREAM_KEY));

    let realized_f = outcome.realized.to_f64().expect("finite decimal");
    let lo = sims.iter().copied().fold(realized_f, f64::min);
    let hi = sims.iter().copied().fold(realized_f, f64::max);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0u32; bins];
    for s in &sims {
        let i = (((s - lo) / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    Ok(json!({
        "n_events": pnls.len(),
        "realized": realized_f,
        "degenerate": false,
        "p_value": outcome.p_value,
        "method": outcome.summary.method,
        "category": SkillCategory::from_p_value(outcome.realized, outcome.p_value),
        "mean": outcome.summary.mean,
        "std_dev": outcome.summary.std_dev,
        "histogram": { "lo": lo, "width": width, "counts": counts },
    }))
}

/// Exponential fit of lead times (days) with fitted and empirical survival.
/// Curve rows are `[t, S(t), S_low(t), S_high(t)]` with the band from the
/// rate interval.
pub fn hazard_curve(taus_text: &str, points: usize) -> Result<Value, String> {
    let mut taus: Vec<f64> = parse_list(taus_text, "lead time")?;
    let fit = fit_hazard(&taus).map_err(|e| e.to_string())?;
    taus.sort_by(f64::total_cmp);
    let n = taus.len() as f64;
    let t_max = taus.last().copied().unwrap_or(1.0) * 1.2;
    let points = points.clamp(2, 1000);
    let curve: Vec<Value> = (0..points)
        .map(|i| {
            let t = t_max * i as f64 / (points - 1) as f64;
            json!([t, survival(fit.lambda_hat, t), survival(fit.ci95[1], t), survival(fit.ci95[0], t)])
        })
        .collect();
    let empirical: Vec<Value> = taus
        .iter()
        .enumerate()
        .map(|(i, t)| json!([t, 1.0 - (i + 1) as f64 / n]))
        .collect();
    Ok(json!({ "fit": fit, "curve": curve, "empirical": empirical }))
}

fn to_js(r: Result<Value, String>) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = exploreIls)]
pub fn explore_ils_js(p_open: f64, p_pre: f64, p_proxy: f64, outcome_yes: bool, epsilon: f64) -> Result<String, JsError> {
    to_js(explore_ils(p_open, p_pre, p_proxy, outcome_yes, epsilon))
}

#[wasm_bindgen(js_name = nullHistogram)]
pub fn null_histogram_js(pnls: &str, draws: u32, seed: u32, bins: u32) -> Result<String, JsError> {
    to_js(null_histogram(pnls, draws, seed as u64, bins as usize))
}

#[wasm_bindgen(js_name = hazardCurve)]
pub fn hazard_curve_js(taus: &str, points: u32) -> Result<String, JsError> {
    to_js(hazard_curve(taus, points as usize))
}
