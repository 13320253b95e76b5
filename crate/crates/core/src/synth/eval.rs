use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{GroundTruth, Population, SynthError};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PopulationCounts {
    pub total: usize,
    pub flagged: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionEval {
    /// Insider share of flagged accounts; `None` when nothing is flagged.
    pub precision: Option<f64>,
    /// Flagged share of insiders; zero when nothing is flagged.
    pub recall: f64,
    pub by_population: BTreeMap<Population, PopulationCounts>,
    /// Moved-market share of queued markets.
    pub market_precision: Option<f64>,
    /// Queued share of insider-moved markets; `None` when none were moved.
    pub market_recall: Option<f64>,
    pub markets_queued: usize,
}

/// Scores flagged accounts and queued markets against the labels.
pub fn evaluate_detection(
    flagged_accounts: &[String],
    queued_markets: &[String],
    truth: &GroundTruth,
) -> Result<DetectionEval, SynthError> {
    let flagged: BTreeSet<&str> = flagged_accounts.iter().map(String::as_str).collect();
    let queued: BTreeSet<&str> = queued_markets.iter().map(String::as_str).collect();
    for id in &flagged {
        if !truth.accounts.contains_key(*id) {
            return Err(SynthError::UnknownId(id.to_string()));
        }
    }
    for id in &queued {
        if !truth.markets.contains_key(*id) {
            return Err(SynthError::UnknownId(id.to_string()));
        }
    }

    let mut by_population: BTreeMap<Population, PopulationCounts> = Population::ALL
        .iter()
        .map(|p| (*p, PopulationCounts::default()))
        .collect();
    for (id, pop) in &truth.accounts {
        let c = by_population.get_mut(pop).unwrap();
        c.total += 1;
        c.flagged += flagged.contains(id.as_str()) as usize;
    }
    let insiders = by_population[&Population::Insider];
    let precision = (!flagged.is_empty()).then(|| insiders.flagged as f64 / flagged.len() as f64);
    let recall = if insiders.total == 0 {
        0.0
    } else {
        insiders.flagged as f64 / insiders.total as f64
    };

    let moved: BTreeSet<&str> = truth.moved_markets().into_iter().collect();
    let hits = queued.intersection(&moved).count();
    Ok(DetectionEval {
        precision,
        recall,
        by_population,
        market_precision: (!queued.is_empty()).then(|| hits as f64 / queued.len() as f64),
        market_recall: (!moved.is_empty()).then(|| hits as f64 / moved.len() as f64),
        markets_queued: queued.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::MarketTruth;
    use rust_decimal::Decimal;

    fn truth() -> GroundTruth {
        let mut t = GroundTruth::default();
        t.accounts.insert("i1".into(), Population::Insider);
        t.accounts.insert("i2".into(), Population::Insider);
        t.accounts.insert("n1".into(), Population::Noise);
        t.accounts.insert("s1".into(), Population::Sybil);
        for (id, leak) in [("m1", true), ("m2", false)] {
            t.markets.insert(
                id.into(),
                MarketTruth { injected_leak: leak, price_coupled: leak, informed_notional: Decimal::ZERO },
            );
        }
        t
    }

    fn ids(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn perfect_detector() {
        let e = evaluate_detection(&ids(&["i1", "i2"]), &ids(&["m1"]), &truth()).unwrap();
        assert_eq!(e.precision, Some(1.0));
        assert_eq!(e.recall, 1.0);
        assert_eq!(e.market_recall, Some(1.0));
        assert_eq!(e.market_precision, Some(1.0));
    }

    #[test]
    fn no_flags() {
        let e = evaluate_detection(&[], &[], &truth()).unwrap();
        assert_eq!(e.precision, None);
        assert_eq!(e.recall, 0.0);
        assert_eq!(e.market_recall, Some(0.0));
        assert_eq!(e.market_precision, None);
    }

    #[test]
    fn false_positive_breakdown() {
        let e = evaluate_detection(&ids(&["i1", "s1", "n1"]), &ids(&["m2"]), &truth()).unwrap();
        assert_eq!(e.precision, Some(1.0 / 3.0));
        assert_eq!(e.recall, 0.5);
        assert_eq!(e.by_population[&Population::Sybil], PopulationCounts { total: 1, flagged: 1 });
        assert_eq!(e.by_population[&Population::Noise].flagged, 1);
        assert_eq!(e.market_precision, Some(0.0));
    }

    #[test]
    fn unknown_ids() {
        assert!(matches!(evaluate_detection(&ids(&["x"]), &[], &truth()), Err(SynthError::UnknownId(_))));
        assert!(matches!(evaluate_detection(&[], &ids(&["mx"]), &truth()), Err(SynthError::UnknownId(_))));
    }
}
