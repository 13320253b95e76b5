//! Deadline information-leakage score and lead-time hazard.
//!
//! For a market opened at `p_open` that resolves to `outcome`, the score is
//! the share of the total move `outcome - p_open` that happened before the
//! public event: `(p(t_event - 60s) - p_open) / (outcome - p_open)`.

mod hazard;
mod score;

use thiserror::Error;

use crate::model::{ModelError, Timestamp};

pub use hazard::{fit_hazard, ks_exponential, lead_times, survival, HazardFit};
pub use score::{
    complement_market, ils_at_anchor, ils_dl, scope_gate, short_window_ils, IlsParams, IlsRegime,
    IlsResult, ScopeGateReport,
};

#[derive(Debug, Error)]
pub enum IlsError {
    #[error("market `{0}` has no event time")]
    MissingEventTime(String),
    #[error("no price for market `{market_id}` at {t}; series starts at {start}")]
    SeriesGap {
        market_id: String,
        t: Timestamp,
        start: Timestamp,
    },
    #[error("market outside the score's scope: {0:?}")]
    NotAdmitted(Box<ScopeGateReport>),
    #[error("market `{0}` opened at its resolution price")]
    ZeroTerminalMove(String),
    #[error("empty lead-time sample")]
    EmptySample,
    #[error("lead time {0} is not positive")]
    NonPositiveDuration(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Category, Market, Outcome, PricePoint, PriceSeries};
    use crate::testkit::day;
    use chrono::Duration;
    use proptest::prelude::*;
    use rust_decimal::Decimal;
    use rust_decimal_macros::dec;

    fn market(outcome: Outcome) -> Market {
        Market {
            market_id: "m".into(),
            event_id: "e".into(),
            category: Category::Politics,
            t_open: day(0),
            t_deadline: Some(day(20)),
            t_event: Some(day(10)),
            t_resolve: day(20),
            outcome,
        }
    }

    fn series(points: &[(Timestamp, Decimal)]) -> PriceSeries {
        PriceSeries::new(
            "m",
            points.iter().map(|&(ts, price)| PricePoint { ts, price }).collect(),
        )
        .unwrap()
    }

    /// Opens at 0.3, sits at `pre` from day 5, jumps to 1 an hour after the event.
    fn path(pre: Decimal) -> PriceSeries {
        series(&[
            (day(0), dec!(0.3)),
            (day(5), pre),
            (day(10) + Duration::hours(1), dec!(1)),
        ])
    }

    #[test]
    fn fixture_scores() {
        let p = IlsParams::default();
        let a = ils_dl(&path(dec!(0.3791)), &market(Outcome::Yes), &p).unwrap();
        let b = ils_dl(&path(dec!(0.0683)), &market(Outcome::Yes), &p).unwrap();
        assert!((a.ils_dl - 0.113).abs() < 1e-12);
        assert!((b.ils_dl - (-0.331)).abs() < 1e-12);
        assert!((a.ils_dl - b.ils_dl - 0.444).abs() < 1e-12);
        assert_eq!(a.regime, IlsRegime::UnitInterval);
        assert_eq!(b.regime, IlsRegime::Negative);
        assert!(a.gate.admitted && b.gate.admitted);
        assert_eq!(a.gate.max_anchor_deviation, Some(0.0));
    }

    #[test]
    fn regimes() {
        assert_eq!(IlsRegime::of(-0.01), IlsRegime::Negative);
        assert_eq!(IlsRegime::of(0.0), IlsRegime::UnitInterval);
        assert_eq!(IlsRegime::of(1.0), IlsRegime::UnitInterval);
        assert_eq!(IlsRegime::of(1.2), IlsRegime::OverUnity);
    }

    #[test]
    fn short_window_clamps_to_open() {
        let p = IlsParams::default();
        let s = path(dec!(0.6));
        let m = market(Outcome::Yes);
        let full = ils_dl(&s, &m, &p).unwrap();
        // the 0.3 -> 0.6 move happened on day 5, outside the last 48h
        assert_eq!(full.short_window_value, Some(0.0));
        let wide = short_window_ils(&s, &m, Duration::days(30), &p).unwrap();
        assert_eq!(wide, full.ils_dl);
    }

    #[test]
    fn edge_and_trivial_moves_are_rejected() {
        let p = IlsParams::default();
        let s = series(&[(day(0), dec!(0.95)), (day(11), dec!(1))]);
        let gate = scope_gate(&s, &market(Outcome::Yes), &p).unwrap();
        assert!(!gate.edge_effect_ok && gate.nontrivial_move_ok && !gate.admitted);
        assert!(matches!(ils_dl(&s, &market(Outcome::Yes), &p), Err(IlsError::NotAdmitted(_))));

        let loose = IlsParams { edge_bound: 0.5, ..IlsParams::default() };
        let s = series(&[(day(0), dec!(0.97)), (day(11), dec!(1))]);
        let gate = scope_gate(&s, &market(Outcome::Yes), &loose).unwrap();
        assert!(gate.edge_effect_ok && !gate.nontrivial_move_ok);

        let s = series(&[(day(0), dec!(0.9)), (day(11), dec!(1))]);
        let gate = scope_gate(&s, &market(Outcome::Yes), &p).unwrap();
        assert!(gate.edge_effect_ok && gate.nontrivial_move_ok && gate.admitted);
    }

    #[test]
    fn sawtooth_around_event_fails_anchor_stability() {
        let t = day(10);
        let mut pts = vec![(day(0), dec!(0.4))];
        for i in -15i64..=15 {
            let price = if i % 2 == 0 { dec!(0.3) } else { dec!(0.7) };
            pts.push((t + Duration::minutes(i), price));
        }
        let s = series(&pts);
        let gate = scope_gate(&s, &market(Outcome::Yes), &IlsParams::default()).unwrap();
        assert!(gate.edge_effect_ok && gate.nontrivial_move_ok);
        assert!(!gate.anchor_stable_ok);
        assert!(gate.max_anchor_deviation.unwrap() > 0.05);
    }

    #[test]
    fn lookup_errors() {
        let p = IlsParams::default();
        let mut m = market(Outcome::Yes);
        m.t_event = None;
        assert!(matches!(scope_gate(&path(dec!(0.5)), &m, &p), Err(IlsError::MissingEventTime(_))));
        let late = series(&[(day(1), dec!(0.5))]);
        assert!(matches!(scope_gate(&late, &market(Outcome::Yes), &p), Err(IlsError::SeriesGap { .. })));
    }

    #[test]
    fn proxy_anchor() {
        let p = IlsParams::default();
        let m = market(Outcome::Yes);
        let v = ils_at_anchor(&path(dec!(0.44)), &m, m.t_resolve - Duration::hours(1), &p).unwrap();
        assert_eq!(v, 1.0);
        let v = ils_at_anchor(&path(dec!(0.44)), &m, day(10), &p).unwrap();
        assert!((v - 0.2).abs() < 1e-12);
    }

    fn price() -> impl Strategy<Value = Decimal> {
        (1u32..10_000).prop_map(|b| Decimal::new(b as i64, 4))
    }

    proptest! {
        #[test]
        fn complement_view_gives_identical_score(open in price(), pre in price(), yes in any::<bool>()) {
            let outcome = if yes { Outcome::Yes } else { Outcome::No };
            let s = series(&[(day(0), open), (day(5), pre), (day(12), outcome.price())]);
            let m = market(outcome);
            let p = IlsParams { edge_bound: 0.5, epsilon: 0.0, ..IlsParams::default() };
            let (cs, cm) = complement_market(&s, &m);
            match (ils_dl(&s, &m, &p), ils_dl(&cs, &cm, &p)) {
                (Ok(a), Ok(b)) => {
                    prop_assert_eq!(a.ils_dl, b.ils_dl);
                    prop_assert_eq!(a.short_window_value, b.short_window_value);
                }
                (Err(IlsError::ZeroTerminalMove(_)), Err(IlsError::ZeroTerminalMove(_))) => {}
                (Err(IlsError::NotAdmitted(_)), Err(IlsError::NotAdmitted(_))) => {}
                (a, b) => prop_assert!(false, "asymmetric: {:?} / {:?}", a, b),
            }
        }

        #[test]
        fn gate_is_monotone_in_epsilon(open in price(), yes in any::<bool>(), e1 in 0.0f64..0.6, e2 in 0.0f64..0.6) {
            let outcome = if yes { Outcome::Yes } else { Outcome::No };
            let s = series(&[(day(0), open), (day(12), outcome.price())]);
            let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
            let strict = scope_gate(&s, &market(outcome), &IlsParams { epsilon: hi, ..IlsParams::default() }).unwrap();
            let loose = scope_gate(&s, &market(outcome), &IlsParams { epsilon: lo, ..IlsParams::default() }).unwrap();
            prop_assert!(!strict.admitted || loose.admitted);
        }

        #[test]
        fn unit_interval_when_path_stays_between_open_and_outcome(open in 100u32..9_900, frac in 0.0f64..=1.0) {
            let open = Decimal::new(open as i64, 4);
            let pre = open + (Decimal::ONE - open) * Decimal::try_from(frac).unwrap();
            let s = series(&[(day(0), open), (day(5), pre.round_dp(12)), (day(12), Decimal::ONE)]);
            let p = IlsParams { edge_bound: 0.5, epsilon: 0.0, ..IlsParams::default() };
            if let Ok(r) = ils_dl(&s, &market(Outcome::Yes), &p) {
                prop_assert!((-1e-9..=1.0 + 1e-9).contains(&r.ils_dl));
            }
        }
    }
}
