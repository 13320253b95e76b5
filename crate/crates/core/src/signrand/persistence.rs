use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::Corpus;
use crate::parallel::par_map;

use super::classify::{classify_account, ClassifyScope, SkillCategory};
use super::market_maker::MarketMakerConfig;
use super::null::{stream_seed, NullSpec};
use super::SignRandError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceResult {
    pub split_seed: u64,
    pub train_events: usize,
    pub test_events: usize,
    /// (train, test) category for every account classified in both halves.
    pub categories: BTreeMap<String, (SkillCategory, SkillCategory)>,
    /// `P(test = skilled | train = skilled)`; `None` when no account was
    /// skilled in training.
    pub retention_rate_skilled: Option<f64>,
    pub retention_rate_lucky: Option<f64>,
}

/// Splits events 50/50 at random and measures how often a training-half
/// classification repeats on the held-out half.
pub fn persistence_retention(
    corpus: &Corpus,
    spec: &NullSpec,
    market_maker: &MarketMakerConfig,
    split_seed: u64,
) -> Result<PersistenceResult, SignRandError> {
    let mut events: Vec<String> = corpus.events().map(|e| e.event_id.clone()).collect();
    let mut rng = ChaCha8Rng::from_seed(stream_seed(split_seed, "persistence-split"));
    events.shuffle(&mut rng);
    let half = events.len() / 2;
    let test: BTreeSet<String> = events.split_off(half).into_iter().collect();
    let train: BTreeSet<String> = events.into_iter().collect();
    let train_scope = ClassifyScope::events(train.clone(), format!("train:{split_seed}"));
    let test_scope = ClassifyScope::events(test.clone(), format!("test:{split_seed}"));

    let ids = corpus.account_ids();
    let pairs = par_map(&ids, |id| -> Result<_, SignRandError> {
        let a = classify_account(corpus, id, spec, market_maker, &train_scope)?;
        if !a.category.is_classified() {
            return Ok(None);
        }
        let b = classify_account(corpus, id, spec, market_maker, &test_scope)?;
        if !b.category.is_classified() {
            return Ok(None);
        }
        Ok(Some((id.to_string(), (a.category, b.category))))
    });
    let mut categories = BTreeMap::new();
    for p in pairs {
        if let Some((id, cats)) = p? {
            categories.insert(id, cats);
        }
    }
    if categories.is_empty() {
        return Err(SignRandError::InsufficientData(format!(
            "no account has {} classifiable events in both halves",
            spec.min_events
        )));
    }
    let retention = |cat: SkillCategory| {
        let train_hits: Vec<_> = categories.values().filter(|(a, _)| *a == cat).collect();
        if train_hits.is_empty() {
            None
        } else {
            let kept = train_hits.iter().filter(|(_, b)| *b == cat).count();
            Some(kept as f64 / train_hits.len() as f64)
        }
    };
    Ok(PersistenceResult {
        split_seed,
        train_events: train.len(),
        test_events: test.len(),
        retention_rate_skilled: retention(SkillCategory::SkilledWinner),
        retention_rate_lucky: retention(SkillCategory::LuckyWinner),
        categories,
    })
}
