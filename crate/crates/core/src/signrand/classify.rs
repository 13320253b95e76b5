use std::collections::BTreeSet;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::model::{Category, Corpus, EventFilter};
use crate::parallel::par_map;

use super::market_maker::{detect_market_maker, MarketMakerConfig};
use super::null::{null_p_value, NullSpec, PValueMethod};
use super::SignRandError;

pub const SKILLED_MAX_P: f64 = 0.05;
pub const UNSKILLED_MIN_P: f64 = 0.95;

/// Below this absolute PnL in every event the null is a point mass.
pub const DEGENERACY_TOLERANCE: Decimal = Decimal::from_parts(1, 0, 0, false, 2);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SkillCategory {
    SkilledWinner,
    LuckyWinner,
    UnluckyLoser,
    UnskilledLoser,
    MarketMaker,
    NotClassified,
}

impl SkillCategory {
    /// Thresholds are inclusive: `p <= 0.05` is skilled, `p >= 0.95` unskilled.
    pub fn from_p_value(realized: Decimal, p_value: f64) -> SkillCategory {
        if p_value <= SKILLED_MAX_P {
            SkillCategory::SkilledWinner
        } else if p_value >= UNSKILLED_MIN_P {
            SkillCategory::UnskilledLoser
        } else if realized > Decimal::ZERO {
            SkillCategory::LuckyWinner
        } else {
            SkillCategory::UnluckyLoser
        }
    }

    pub fn is_classified(self) -> bool {
        !matches!(self, SkillCategory::NotClassified | SkillCategory::MarketMaker)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccountClassification {
    pub account_id: String,
    pub n_events: usize,
    pub realized_pnl: Decimal,
    pub p_value: Option<f64>,
    pub method: Option<PValueMethod>,
    pub category: SkillCategory,
    pub degenerate: bool,
}

/// Which events an account is classified on, plus the RNG stream tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassifyScope {
    pub filter: EventFilter,
    pub tag: String,
}

impl ClassifyScope {
    pub fn platform() -> Self {
        Self {
            filter: EventFilter::all(),
            tag: "all".into(),
        }
    }

    /// Only markets of `category`; `min_events` then counts events within it.
    pub fn category(category: Category) -> Self {
        Self {
            filter: EventFilter::category(category),
            tag: format!("category:{category}"),
        }
    }

    pub fn events(events: BTreeSet<String>, tag: impl Into<String>) -> Self {
        Self {
            filter: EventFilter::events(events),
            tag: tag.into(),
        }
    }
}

/// Classifies one account.
///
/// Market makers are separated first; then accounts with fewer than
/// `min_events` events, or with every event PnL below one cent, are left
/// unclassified.
pub fn classify_account(
    corpus: &Corpus,
    account_id: &str,
    spec: &NullSpec,
    market_maker: &MarketMakerConfig,
    scope: &ClassifyScope,
) -> Result<AccountClassification, SignRandError> {
    let rows = corpus
        .event_pnl_table_filtered(account_id, &scope.filter)
        .map_err(|_| SignRandError::UnknownAccount(account_id.to_string()))?;
    let pnls: Vec<Decimal> = rows.iter().map(|r| r.pnl).collect();
    let realized: Decimal = pnls.iter().sum();
    let mut out = AccountClassification {
        account_id: account_id.to_string(),
        n_events: pnls.len(),
        realized_pnl: realized,
        p_value: None,
        method: None,
        category: SkillCategory::NotClassified,
        degenerate: false,
    };

    if detect_market_maker(corpus, account_id, market_maker)? {
        out.category = SkillCategory::MarketMaker;
        return Ok(out);
    }
    if pnls.len() < spec.min_events {
        return Ok(out);
    }
    if pnls.iter().all(|p| p.abs() < DEGENERACY_TOLERANCE) {
        out.degenerate = true;
        return Ok(out);
    }
    let stream_key = format!("{account_id}\u{1f}{}", scope.tag);
    let null = null_p_value(&pnls, spec, &stream_key)?;
    out.p_value = Some(null.p_value);
    out.method = Some(null.summary.method);
    out.category = SkillCategory::from_p_value(realized, null.p_value);
    Ok(out)
}

/// Classifies every account in `account_ids` (all accounts when `None`).
///
/// Output order follows the input (or sorted account ids) regardless of
/// worker count.
pub fn classify_accounts(
    corpus: &Corpus,
    account_ids: Option<&[&str]>,
    spec: &NullSpec,
    market_maker: &MarketMakerConfig,
    scope: &ClassifyScope,
) -> Result<Vec<AccountClassification>, SignRandError> {
    let ids: Vec<&str> = match account_ids {
        Some(ids) => ids.to_vec(),
        None => corpus.account_ids(),
    };
    par_map(&ids, |id| classify_account(corpus, id, spec, market_maker, scope))
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Outcome, Side};
    use crate::signrand::market_maker::detect_market_maker;
    use crate::testkit::{day, Kit};
    use rust_decimal_macros::dec;

    fn classify(kit: &Kit, id: &str, scope: &ClassifyScope) -> AccountClassification {
        classify_account(&kit.build(), id, &NullSpec::default(), &MarketMakerConfig::default(), scope).unwrap()
    }

    #[test]
    fn nine_events_are_not_classified() {
        let mut kit = Kit::new();
        kit.events_with_pnl("a", &[10; 9], Category::Politics);
        let c = classify(&kit, "a", &ClassifyScope::platform());
        assert_eq!(c.category, SkillCategory::NotClassified);
        assert_eq!(c.n_events, 9);
        assert!(c.p_value.is_none());
    }

    #[test]
    fn ten_straight_wins_are_skilled() {
        let mut kit = Kit::new();
        kit.events_with_pnl("a", &[10; 10], Category::Politics);
        let c = classify(&kit, "a", &ClassifyScope::platform());
        assert_eq!(c.category, SkillCategory::SkilledWinner);
        assert_eq!(c.p_value, Some(1.0 / 1024.0));
        assert_eq!(c.realized_pnl, dec!(100));
    }

    #[test]
    fn category_rules() {
        assert_eq!(SkillCategory::from_p_value(dec!(-5), 0.60), SkillCategory::UnluckyLoser);
        assert_eq!(SkillCategory::from_p_value(dec!(5), 0.60), SkillCategory::LuckyWinner);
        assert_eq!(SkillCategory::from_p_value(dec!(0), 0.60), SkillCategory::UnluckyLoser);
        assert_eq!(SkillCategory::from_p_value(dec!(50), 0.05), SkillCategory::SkilledWinner);
        assert_eq!(SkillCategory::from_p_value(dec!(-50), 0.95), SkillCategory::UnskilledLoser);
    }

    #[test]
    fn sub_cent_histories_are_degenerate() {
        let mut kit = Kit::new();
        for i in 0..12 {
            let id = format!("m{i}");
            kit.market(&id, &format!("e{i}"), Category::Sports, Outcome::Yes);
            // 0.01 shares at 0.5 -> 0.005 per event
            kit.trade("a", &id, Side::Buy, dec!(0.01), dec!(0.5), day(1));
        }
        let c = classify(&kit, "a", &ClassifyScope::platform());
        assert!(c.degenerate);
        assert_eq!(c.category, SkillCategory::NotClassified);
    }

    #[test]
    fn category_scope_counts_events_within_category() {
        let mut kit = Kit::new();
        kit.events_with_pnl("a", &[10; 10], Category::Politics);
        kit.events_with_pnl("a", &[10; 5], Category::Sports);
        assert_eq!(
            classify(&kit, "a", &ClassifyScope::category(Category::Politics)).category,
            SkillCategory::SkilledWinner
        );
        let sports = classify(&kit, "a", &ClassifyScope::category(Category::Sports));
        assert_eq!(sports.category, SkillCategory::NotClassified);
        assert_eq!(sports.n_events, 5);
    }

    #[test]
    fn unknown_account_is_an_error() {
        let kit = Kit::new();
        let r = classify_account(&kit.build(), "ghost", &NullSpec::default(), &MarketMakerConfig::default(), &ClassifyScope::platform());
        assert!(matches!(r, Err(SignRandError::UnknownAccount(_))));
    }

    fn maker_kit(markets: usize, two_sided: usize, sell_scale: Decimal) -> Kit {
        let mut kit = Kit::new();
        for i in 0..markets {
            let id = format!("m{i}");
            kit.market(&id, &format!("e{i}"), Category::Crypto, Outcome::Yes);
            kit.trade("mm", &id, Side::Buy, dec!(100), dec!(0.50), day(1));
            if i < two_sided {
                kit.trade("mm", &id, Side::Sell, dec!(100) * sell_scale, dec!(0.50), day(2));
            }
        }
        kit
    }

    #[test]
    fn market_maker_detection() {
        // 90 two-sided of 100; buys 5000, sells 90*50*s. s=1.0 -> net 500/9500 = 0.053
        let kit = maker_kit(100, 90, dec!(1.0));
        let corpus = kit.build();
        let stats = crate::signrand::market_maker_stats(&corpus, "mm").unwrap();
        assert!((stats.net_to_gross - 500.0 / 9500.0).abs() < 1e-12);
        assert!(detect_market_maker(&corpus, "mm", &MarketMakerConfig::default()).unwrap());
        let c = classify_account(&corpus, "mm", &NullSpec::default(), &MarketMakerConfig::default(), &ClassifyScope::platform()).unwrap();
        assert_eq!(c.category, SkillCategory::MarketMaker);

        let small = maker_kit(3, 3, dec!(1.0)).build();
        assert!(!detect_market_maker(&small, "mm", &MarketMakerConfig::default()).unwrap());

        let directional = maker_kit(100, 0, dec!(1.0)).build();
        assert!(!detect_market_maker(&directional, "mm", &MarketMakerConfig::default()).unwrap());
    }

    #[test]
    fn rescaled_sizes_keep_classification() {
        let mut kit = Kit::new();
        kit.events_with_pnl("a", &[10, -3, 7, 22, -9, 4, 15, 1, -2, 8, 5, 6, -1, 30, 2], Category::Finance);
        let base = classify(&kit, "a", &ClassifyScope::platform());
        for t in &mut kit.raw.trades {
            t.size *= dec!(100);
        }
        let scaled = classify(&kit, "a", &ClassifyScope::platform());
        assert_eq!(base.category, scaled.category);
        assert_eq!(base.p_value.unwrap().to_bits(), scaled.p_value.unwrap().to_bits());
        assert_eq!(base.method, Some(PValueMethod::MonteCarlo));
    }
}
