//! Three-stage surveillance pipeline.
//!
//! Stage 1 scores accounts from category-conditioned skill, lifecycle flags,
//! composite percentiles and wallet context. Stage 2 takes markets where a
//! flagged account holds a large enough share of the winning-side notional
//! and queues those whose deadline score and short-window score both clear
//! their thresholds. Stage 3 orders and truncates the queue for review.

use std::collections::{BTreeMap, BTreeSet};

use rust_decimal::prelude::ToPrimitive;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::config::AnalysisConfig;
use crate::ils::{ils_dl, IlsError, IlsResult};
use crate::model::{seconds_to_days, Category, Corpus, FundingTag};
use crate::parallel::par_map;
use crate::screens::{composite_score, lifecycle_scan};
use crate::signrand::{classify_accounts, ClassifyScope, SkillCategory};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub category_weights: BTreeMap<Category, f64>,
    pub lifecycle_weight: f64,
    pub composite_weight: f64,
    pub context_weight: f64,
    pub young_wallet_days: f64,
    pub stage1_threshold: f64,
    pub holding_fraction: f64,
    pub ils_threshold: f64,
    pub short_window_threshold: f64,
    pub queue_cap: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            category_weights: BTreeMap::from([
                (Category::Politics, 3.0),
                (Category::Finance, 1.5),
                (Category::Crypto, 1.0),
                (Category::Sports, 0.5),
                (Category::Other, 1.0),
            ]),
            lifecycle_weight: 3.0,
            composite_weight: 1.0,
            context_weight: 0.5,
            young_wallet_days: 14.0,
            stage1_threshold: 3.0,
            holding_fraction: 0.05,
            ils_threshold: 0.25,
            short_window_threshold: 0.10,
            queue_cap: 100,
        }
    }
}

impl PipelineConfig {
    /// Weight of a category; categories missing from the map weigh zero.
    pub fn category_weight(&self, category: Category) -> f64 {
        self.category_weights.get(&category).copied().unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<(), String> {
        let weights = self
            .category_weights
            .values()
            .chain([&self.lifecycle_weight, &self.composite_weight, &self.context_weight]);
        for w in weights {
            if !(*w >= 0.0) || !w.is_finite() {
                return Err("pipeline weights must be finite and >= 0".into());
            }
        }
        if !(0.0..=1.0).contains(&self.holding_fraction) {
            return Err("pipeline.holding_fraction must be in [0,1]".into());
        }
        if !self.stage1_threshold.is_finite()
            || !self.ils_threshold.is_finite()
            || !self.short_window_threshold.is_finite()
        {
            return Err("pipeline thresholds must be finite".into());
        }
        if !(self.young_wallet_days >= 0.0) {
            return Err("pipeline.young_wallet_days must be >= 0".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskScore {
    pub account_id: String,
    /// Within-category classification for every category the account traded.
    pub skill: BTreeMap<Category, SkillCategory>,
    pub lifecycle_flags: usize,
    pub composite_percentile: f64,
    pub wallet_age_days: Option<f64>,
    pub funding_tag: Option<FundingTag>,
    pub total: f64,
    pub flagged: bool,
}

/// Stage 1: risk score of every account, in account-id order.
pub fn stage1_risk_scores(corpus: &Corpus, config: &AnalysisConfig) -> Vec<RiskScore> {
    let p = &config.pipeline;
    let ids = corpus.account_ids();

    let mut skill: BTreeMap<&str, BTreeMap<Category, SkillCategory>> = BTreeMap::new();
    for category in Category::ALL {
        let scope = ClassifyScope::category(category);
        let rows = classify_accounts(corpus, Some(&ids), &config.null, &config.market_maker, &scope)
            .expect("ids come from the corpus");
        for (id, row) in ids.iter().zip(rows) {
            if row.n_events > 0 || row.category == SkillCategory::MarketMaker {
                skill.entry(id).or_default().insert(category, row.category);
            }
        }
    }

    let mut flags: BTreeMap<String, usize> = BTreeMap::new();
    for f in lifecycle_scan(corpus, &config.lifecycle) {
        if f.flagged {
            *flags.entry(f.account_id).or_default() += 1;
        }
    }

    let market_ids: Vec<&str> = corpus.markets().map(|m| m.market_id.as_str()).collect();
    let mut percentile: BTreeMap<String, f64> = BTreeMap::new();
    for scores in par_map(&market_ids, |m| composite_score(corpus, m, &config.composite)) {
        for s in scores.into_iter().flatten() {
            let e = percentile.entry(s.account_id).or_insert(0.0);
            *e = e.max(s.percentile);
        }
    }

    ids.iter()
        .map(|&id| {
            let account = corpus.account(id).expect("listed account");
            let skill = skill.remove(id).unwrap_or_default();
            let lifecycle_flags = flags.get(id).copied().unwrap_or(0);
            let composite_percentile = percentile.get(id).copied().unwrap_or(0.0);
            let wallet_age_days = match (account.effective_created_at(), account.last_trade_ts) {
                (Some(c), Some(l)) => Some(seconds_to_days((l - c).num_seconds())),
                _ => None,
            };
            let skill_part: f64 = skill
                .iter()
                .filter(|(_, s)| **s == SkillCategory::SkilledWinner)
                .map(|(c, _)| p.category_weight(*c))
                .sum();
            let young = wallet_age_days.is_some_and(|d| d < p.young_wallet_days);
            let mixer = account.funding_tag == Some(FundingTag::Mixer);
            let context = (young as u8 + mixer as u8) as f64;
            let total = skill_part
                + p.lifecycle_weight * lifecycle_flags as f64
                + p.composite_weight * composite_percentile
                + p.context_weight * context;
            RiskScore {
                account_id: id.to_string(),
                skill,
                lifecycle_flags,
                composite_percentile,
                wallet_age_days,
                funding_tag: account.funding_tag,
                total,
                flagged: total >= p.stage1_threshold,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Holding {
    pub account_id: String,
    /// Share of the market's winning-side notional traded before the event.
    pub holding_fraction: f64,
    pub risk_total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueueEntry {
    pub market_id: String,
    pub ils: IlsResult,
    pub accounts: Vec<Holding>,
}

impl QueueEntry {
    fn max_risk(&self) -> f64 {
        self.accounts.iter().map(|h| h.risk_total).fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    MissingEventTime,
    NoPriceSeries,
    SeriesGap,
    ZeroTerminalMove,
    EdgeEffect,
    TrivialMove,
    AnchorUnstable,
    BelowIlsThreshold,
    BelowShortWindowThreshold,
}

impl SkipReason {
    pub fn code(self) -> &'static str {
        match self {
            SkipReason::MissingEventTime => "missing_event_time",
            SkipReason::NoPriceSeries => "no_price_series",
            SkipReason::SeriesGap => "series_gap",
            SkipReason::ZeroTerminalMove => "zero_terminal_move",
            SkipReason::EdgeEffect => "edge_effect",
            SkipReason::TrivialMove => "trivial_move",
            SkipReason::AnchorUnstable => "anchor_unstable",
            SkipReason::BelowIlsThreshold => "below_ils_threshold",
            SkipReason::BelowShortWindowThreshold => "below_short_window_threshold",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedMarket {
    pub market_id: String,
    pub reason: SkipReason,
    pub ils_dl: Option<f64>,
    pub short_window: Option<f64>,
    pub accounts: Vec<Holding>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage2 {
    /// Markets with at least one flagged account at or above the holding fraction.
    pub candidates: usize,
    pub queue: Vec<QueueEntry>,
    pub skipped: Vec<SkippedMarket>,
}

/// Flagged accounts at or above the holding fraction, by descending holding.
fn responsible(
    corpus: &Corpus,
    market_id: &str,
    flagged: &BTreeMap<&str, f64>,
    holding_fraction: f64,
) -> Vec<Holding> {
    let market = corpus.market(market_id).expect("corpus market");
    let long = market.outcome.winning_side();
    let cutoff = market.t_event.unwrap_or(market.t_resolve);
    let mut by_account: BTreeMap<&str, Decimal> = BTreeMap::new();
    let mut total = Decimal::ZERO;
    for t in corpus.market_trades(market_id) {
        if t.side == long && t.ts < cutoff {
            total += t.notional();
            *by_account.entry(t.account_id.as_str()).or_default() += t.notional();
        }
    }
    if total.is_zero() {
        return Vec::new();
    }
    let mut out: Vec<Holding> = by_account
        .into_iter()
        .filter_map(|(id, n)| {
            let risk_total = *flagged.get(id)?;
            let holding_fraction_of = (n / total).to_f64().unwrap_or(0.0);
            (holding_fraction_of >= holding_fraction).then(|| Holding {
                account_id: id.to_string(),
                holding_fraction: holding_fraction_of,
                risk_total,
            })
        })
        .collect();
    out.sort_by(|a, b| {
        b.holding_fraction
            .total_cmp(&a.holding_fraction)
            .then_with(|| a.account_id.cmp(&b.account_id))
    });
    out
}

enum Scored {
    NotCandidate,
    Queued(QueueEntry),
    Skipped(SkippedMarket),
}

/// Stage 2: ILS-gated market queue over markets held by flagged accounts.
pub fn stage2_market_queue(corpus: &Corpus, flagged: &[RiskScore], config: &AnalysisConfig) -> Stage2 {
    let p = &config.pipeline;
    let flagged: BTreeMap<&str, f64> = flagged
        .iter()
        .filter(|r| r.flagged)
        .map(|r| (r.account_id.as_str(), r.total))
        .collect();
    let touched: BTreeSet<&str> = flagged
        .keys()
        .flat_map(|a| corpus.account_markets(a))
        .collect();
    let markets: Vec<&str> = touched.into_iter().collect();

    let scored = par_map(&markets, |&market_id| {
        let accounts = responsible(corpus, market_id, &flagged, p.holding_fraction);
        if accounts.is_empty() {
            return Scored::NotCandidate;
        }
        let skip = |reason, ils_dl, short_window, accounts| {
            Scored::Skipped(SkippedMarket {
                market_id: market_id.to_string(),
                reason,
                ils_dl,
                short_window,
                accounts,
            })
        };
        let market = corpus.market(market_id).expect("corpus market");
        let Some(series) = corpus.price_series(market_id) else {
            return skip(SkipReason::NoPriceSeries, None, None, accounts);
        };
        match ils_dl(series, market, &config.ils) {
            Ok(r) => {
                let short = r.short_window_value.unwrap_or(f64::NAN);
                if !(r.ils_dl > p.ils_threshold) {
                    skip(SkipReason::BelowIlsThreshold, Some(r.ils_dl), Some(short), accounts)
                } else if !(short > p.short_window_threshold) {
                    skip(SkipReason::BelowShortWindowThreshold, Some(r.ils_dl), Some(short), accounts)
                } else {
                    Scored::Queued(QueueEntry {
                        market_id: market_id.to_string(),
                        ils: r,
                        accounts,
                    })
                }
            }
            Err(e) => {
                let reason = match e {
                    IlsError::MissingEventTime(_) => SkipReason::MissingEventTime,
                    IlsError::SeriesGap { .. } | IlsError::Model(_) => SkipReason::SeriesGap,
                    IlsError::ZeroTerminalMove(_) => SkipReason::ZeroTerminalMove,
                    IlsError::NotAdmitted(g) if !g.edge_effect_ok => SkipReason::EdgeEffect,
                    IlsError::NotAdmitted(g) if !g.nontrivial_move_ok => SkipReason::TrivialMove,
                    IlsError::NotAdmitted(_) => SkipReason::AnchorUnstable,
                    IlsError::EmptySample | IlsError::NonPositiveDuration(_) => {
                        unreachable!("hazard errors do not arise from scoring")
                    }
                };
                skip(reason, None, None, accounts)
            }
        }
    });

    let mut out = Stage2 {
        candidates: 0,
        queue: Vec::new(),
        skipped: Vec::new(),
    };
    for s in scored {
        match s {
            Scored::NotCandidate => {}
            Scored::Queued(q) => {
                out.candidates += 1;
                out.queue.push(q);
            }
            Scored::Skipped(s) => {
                out.candidates += 1;
                out.skipped.push(s);
            }
        }
    }
    out
}

/// Stage 3: review order (score, then responsible risk, then id), capped.
pub fn stage3_export(queue: &[QueueEntry], cap: usize) -> Vec<QueueEntry> {
    let mut sorted = queue.to_vec();
    sorted.sort_by(|a, b| {
        b.ils
            .ils_dl
            .total_cmp(&a.ils.ils_dl)
            .then_with(|| b.max_risk().total_cmp(&a.max_risk()))
            .then_with(|| a.market_id.cmp(&b.market_id))
    });
    sorted.truncate(cap);
    sorted
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage1 {
    pub accounts_scored: usize,
    pub flagged: Vec<RiskScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub config: AnalysisConfig,
    pub corpus_digest: String,
    pub markets: usize,
    pub stage1: Stage1,
    pub stage2: Stage2,
    pub stage3: Vec<QueueEntry>,
    /// Where the review queue was written, once exported.
    pub export_path: Option<String>,
}

/// Runs stages 1 to 3 in order.
pub fn run_pipeline(corpus: &Corpus, config: &AnalysisConfig) -> PipelineReport {
    let scores = stage1_risk_scores(corpus, config);
    let stage2 = stage2_market_queue(corpus, &scores, config);
    let stage3 = stage3_export(&stage2.queue, config.pipeline.queue_cap);
    PipelineReport {
        config: config.clone(),
        corpus_digest: crate::io::corpus_digest(corpus),
        markets: corpus.markets().count(),
        stage1: Stage1 {
            accounts_scored: scores.len(),
            flagged: scores.into_iter().filter(|r| r.flagged).collect(),
        },
        stage2,
        stage3,
        export_path: None,
    }
}
