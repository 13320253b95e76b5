//! Labelled synthetic worlds.
//!
//! Markets open uniformly over a horizon; the public event follows after an
//! exponential lead time and the market resolves one to three days later.
//! Prices walk hourly from a uniform prior, jump toward the outcome shortly
//! after the event, and settle at the outcome. Five populations trade on top:
//! noise, skilled, insiders, sybils and market makers.

mod eval;

use std::collections::BTreeMap;

use chrono::{Duration, TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use rust_decimal::prelude::FromPrimitive;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::{
    AccountRecord, Category, EventRecord, FundingTag, Market, Outcome, PriceRecord, RawCorpus, Side,
    Timestamp, Trade,
};
use crate::parallel::par_map;
use crate::signrand::stream_seed;

pub use eval::{evaluate_detection, DetectionEval, PopulationCounts};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid world config: {0}")]
    InvalidConfig(String),
    #[error("unknown id `{0}`")]
    UnknownId(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Population {
    Noise,
    Skilled,
    Insider,
    Sybil,
    MarketMaker,
}

impl Population {
    pub const ALL: [Population; 5] = [
        Population::Noise,
        Population::Skilled,
        Population::Insider,
        Population::Sybil,
        Population::MarketMaker,
    ];

    fn tag(self) -> &'static str {
        match self {
            Population::Noise => "noise",
            Population::Skilled => "skilled",
            Population::Insider => "insider",
            Population::Sybil => "sybil",
            Population::MarketMaker => "mm",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Populations {
    pub noise: usize,
    pub skilled: usize,
    pub insider: usize,
    pub sybil: usize,
    pub market_maker: usize,
}

impl Default for Populations {
    fn default() -> Self {
        Self {
            noise: 400,
            skilled: 20,
            insider: 10,
            sybil: 20,
            market_maker: 4,
        }
    }
}

impl Populations {
    fn count(&self, p: Population) -> usize {
        match p {
            Population::Noise => self.noise,
            Population::Skilled => self.skilled,
            Population::Insider => self.insider,
            Population::Sybil => self.sybil,
            Population::MarketMaker => self.market_maker,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WorldConfig {
    pub seed: u64,
    pub start: Timestamp,
    /// Market opens are spread uniformly over this many days.
    pub horizon_days: f64,
    pub markets_per_category: BTreeMap<Category, usize>,
    /// Rate of the exponential lead time from open to event, per day.
    pub lead_rate_per_day: BTreeMap<Category, f64>,
    pub resolve_lag_days: [f64; 2],
    /// Standard deviation of the hourly price step.
    pub price_noise_per_hour: f64,
    /// The post-event jump lands this many minutes after the event.
    pub jump_lag_minutes: [i64; 2],
    pub populations: Populations,
    pub noise_events: [usize; 2],
    pub noise_notional: [f64; 2],
    /// Probability that a skilled account takes the winning side.
    pub skilled_edge: f64,
    pub skilled_events: usize,
    pub skilled_notional: [f64; 2],
    /// Insider flow moves the price when on.
    pub insider_coupling: bool,
    /// Price move per 1000 of insider notional.
    pub impact_per_thousand: f64,
    pub insider_notional: [f64; 2],
    /// Insiders only enter markets whose winning side is priced at or below this at open.
    pub insider_max_entry_price: f64,
    pub sybil_notional: [f64; 2],
    pub market_maker_markets: usize,
    pub market_maker_notional: f64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            start: Utc.with_ymd_and_hms(2026, 1, 1, 0, 0, 0).unwrap(),
            horizon_days: 120.0,
            markets_per_category: Category::ALL.iter().map(|c| (*c, 40)).collect(),
            lead_rate_per_day: Category::ALL.iter().map(|c| (*c, 0.241)).collect(),
            resolve_lag_days: [1.0, 3.0],
            price_noise_per_hour: 0.002,
            jump_lag_minutes: [15, 45],
            populations: Populations::default(),
            noise_events: [10, 30],
            noise_notional: [20.0, 200.0],
            skilled_edge: 0.75,
            skilled_events: 40,
            skilled_notional: [50.0, 500.0],
            insider_coupling: false,
            impact_per_thousand: 0.08,
            insider_notional: [3000.0, 6000.0],
            insider_max_entry_price: 0.6,
            sybil_notional: [100.0, 900.0],
            market_maker_markets: 60,
            market_maker_notional: 200.0,
        }
    }
}

impl WorldConfig {
    /// Only noise traders, `accounts` of them, each in `events` events.
    pub fn noise_only(seed: u64, accounts: usize, events: [usize; 2]) -> Self {
        Self {
            seed,
            populations: Populations {
                noise: accounts,
                skilled: 0,
                insider: 0,
                sybil: 0,
                market_maker: 0,
            },
            noise_events: events,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::InvalidConfig(m.to_string()));
        if !(self.skilled_edge > 0.5 && self.skilled_edge <= 1.0) {
            return bad("skilled_edge must be in (0.5, 1]");
        }
        if self.lead_rate_per_day.values().any(|r| !(*r > 0.0 && r.is_finite())) {
            return bad("lead rates must be > 0");
        }
        if self
            .markets_per_category
            .iter()
            .any(|(c, n)| *n > 0 && !self.lead_rate_per_day.contains_key(c))
        {
            return bad("every category with markets needs a lead rate");
        }
        if !(self.horizon_days > 0.0) || !(self.price_noise_per_hour >= 0.0) {
            return bad("horizon_days must be > 0 and price_noise_per_hour >= 0");
        }
        for [lo, hi] in [
            self.resolve_lag_days,
            self.noise_notional,
            self.skilled_notional,
            self.insider_notional,
            self.sybil_notional,
        ] {
            if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
                return bad("ranges must satisfy 0 < lo <= hi");
            }
        }
        if self.resolve_lag_days[0] < 1.0 {
            return bad("resolve_lag_days must start at >= 1");
        }
        let [jl, jh] = self.jump_lag_minutes;
        if !(0 < jl && jl <= jh && jh < 24 * 60) {
            return bad("jump_lag_minutes must satisfy 0 < lo <= hi < 1440");
        }
        let [el, eh] = self.noise_events;
        if el == 0 || el > eh {
            return bad("noise_events must satisfy 0 < lo <= hi");
        }
        if !(self.impact_per_thousand >= 0.0) || !(self.market_maker_notional > 0.0) {
            return bad("impact_per_thousand must be >= 0 and market_maker_notional > 0");
        }
        if !(self.insider_max_entry_price > 0.0 && self.insider_max_entry_price < 1.0) {
            return bad("insider_max_entry_price must be in (0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketTruth {
    /// An insider traded this market before the event.
    pub injected_leak: bool,
    /// The insider's flow moved the price.
    pub price_coupled: bool,
    pub informed_notional: Decimal,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub accounts: BTreeMap<String, Population>,
    pub markets: BTreeMap<String, MarketTruth>,
}

impl GroundTruth {
    /// Markets whose price an insider moved.
    pub fn moved_markets(&self) -> Vec<&str> {
        self.markets
            .iter()
            .filter(|(_, t)| t.injected_leak && t.price_coupled)
            .map(|(id, _)| id.as_str())
            .collect()
    }
}

fn rng_for(seed: u64, key: &str) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(stream_seed(seed, key))
}

fn uniform(rng: &mut ChaCha8Rng, [lo, hi]: [f64; 2]) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

fn secs(days: f64) -> Duration {
    Duration::seconds((days * 86_400.0).round() as i64)
}

fn dec(x: f64, dp: u32) -> Decimal {
    Decimal::from_f64(x).expect("finite").round_dp(dp)
}

fn account_id(seed: u64, pop: Population, i: usize) -> String {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(format!("{}:{i}", pop.tag()).as_bytes());
    let digest = h.finalize();
    format!("0x{:x}", digest)[..42].to_string()
}

#[derive(Debug, Clone)]
struct Draft {
    market: Market,
    t_event: Timestamp,
    p0: f64,
}

impl Draft {
    /// Open price of the side that wins.
    fn winning_price(&self) -> f64 {
        match self.market.outcome {
            Outcome::Yes => self.p0,
            Outcome::No => 1.0 - self.p0,
        }
    }
}

fn draft_markets(cfg: &WorldConfig) -> Vec<Draft> {
    let specs: Vec<(Category, usize)> = cfg
        .markets_per_category
        .iter()
        .flat_map(|(c, n)| (0..*n).map(move |i| (*c, i)))
        .collect();
    par_map(&specs, |&(category, i)| {
        let id = format!("{}-{i:04}", category.as_str().to_lowercase());
        let mut rng = rng_for(cfg.seed, &format!("market:{id}"));
        let t_open = cfg.start + secs(rng.random_range(0.0..cfg.horizon_days));
        let t_open = t_open - Duration::seconds(t_open.timestamp() % 60);
        let tau = Exp::new(cfg.lead_rate_per_day[&category]).unwrap().sample(&mut rng);
        let t_event = t_open + secs(tau).max(Duration::seconds(1));
        let t_resolve = t_event + secs(uniform(&mut rng, cfg.resolve_lag_days));
        let p0 = (rng.random_range(0.2..0.8) * 10_000.0f64).round() / 10_000.0;
        let outcome = if rng.random::<f64>() < p0 { Outcome::Yes } else { Outcome::No };
        Draft {
            market: Market {
                market_id: format!("mkt-{id}"),
                event_id: format!("evt-{id}"),
                category,
                t_open,
                t_deadline: Some(t_resolve),
                t_event: Some(t_event),
                t_resolve,
                outcome,
            },
            t_event,
            p0,
        }
    })
}

#[derive(Debug, Clone)]
struct InsiderPlan {
    account_id: String,
    created_at: Timestamp,
    /// (time, notional) in time order.
    orders: Vec<(Timestamp, f64)>,
    funding_tag: FundingTag,
}

/// Piecewise-constant price path.
struct Path {
    points: Vec<(Timestamp, f64)>,
}

impl Path {
    fn push(&mut self, ts: Timestamp, p: f64) {
        let p = (p * 10_000.0).round() / 10_000.0;
        match self.points.last_mut() {
            Some(last) if last.0 == ts => last.1 = p,
            _ => self.points.push((ts, p)),
        }
    }

    fn at(&self, t: Timestamp) -> f64 {
        let i = self.points.partition_point(|(ts, _)| *ts <= t);
        self.points[i.saturating_sub(1)].1
    }
}

fn build_path(
    cfg: &WorldConfig,
    d: &Draft,
    insider: Option<&InsiderPlan>,
) -> (Path, Vec<Trade>) {
    let m = &d.market;
    let mut rng = rng_for(cfg.seed, &format!("path:{}", m.market_id));
    let step = Normal::new(0.0, cfg.price_noise_per_hour).unwrap();
    let lag = rng.random_range(cfg.jump_lag_minutes[0]..=cfg.jump_lag_minutes[1]);
    let t_jump = d.t_event + Duration::minutes(lag);

    let mut path = Path { points: Vec::new() };
    let mut p = d.p0;
    path.push(m.t_open, p);
    let orders: &[(Timestamp, f64)] = insider.map(|i| i.orders.as_slice()).unwrap_or(&[]);
    let mut next_order = 0;
    let mut trades = Vec::new();
    let long = m.outcome.winning_side();
    let mut tick = m.t_open + Duration::hours(1);
    loop {
        let order_due = orders.get(next_order).filter(|(t, _)| *t < tick.min(t_jump));
        if let Some(&(t, notional)) = order_due {
            let plan = insider.unwrap();
            let price = dec(p, 4);
            trades.push(Trade {
                trade_id: format!("{}-{next_order:04}", plan.account_id),
                account_id: plan.account_id.clone(),
                market_id: m.market_id.clone(),
                side: long,
                size: dec(notional / p, 2),
                price,
                ts: t,
            });
            if cfg.insider_coupling {
                let dir = if long == Side::Buy { 1.0 } else { -1.0 };
                p = (p + dir * cfg.impact_per_thousand * notional / 1000.0).clamp(0.01, 0.99);
                path.push(t, p);
            }
            next_order += 1;
            continue;
        }
        if tick >= t_jump {
            break;
        }
        p = (p + step.sample(&mut rng)).clamp(0.01, 0.99);
        path.push(tick, p);
        tick += Duration::hours(1);
    }
    path.push(t_jump, if m.outcome == Outcome::Yes { 0.99 } else { 0.01 });
    path.push(m.t_resolve, m.outcome.bit() as f64);
    (path, trades)
}

/// Picks insider markets and plans their orders.
fn plan_insiders(cfg: &WorldConfig, drafts: &[Draft]) -> Result<BTreeMap<usize, InsiderPlan>, SynthError> {
    let n = cfg.populations.insider;
    if n == 0 {
        return Ok(BTreeMap::new());
    }
    let mut eligible: Vec<usize> = drafts
        .iter()
        .enumerate()
        .filter(|(_, d)| {
            d.t_event - d.market.t_open >= Duration::days(2)
                && d.winning_price() <= cfg.insider_max_entry_price
        })
        .map(|(i, _)| i)
        .collect();
    if eligible.len() < n {
        return Err(SynthError::InvalidConfig(format!(
            "{n} insiders requested but only {} markets can host one",
            eligible.len()
        )));
    }
    let mut rng = rng_for(cfg.seed, "insider-assignment");
    eligible.shuffle(&mut rng);
    let mut out = BTreeMap::new();
    for (j, &mi) in eligible[..n].iter().enumerate() {
        let d = &drafts[mi];
        let account_id = account_id(cfg.seed, Population::Insider, j);
        let mut rng = rng_for(cfg.seed, &format!("insider:{j}"));
        let created_at = d.t_event - secs(rng.random_range(1.6..6.5));
        let total = uniform(&mut rng, cfg.insider_notional);
        let k = rng.random_range(2..=4);
        let window = (36 * 3600 - 30 * 60) as f64;
        let mut times: Vec<Timestamp> = (0..k)
            .map(|_| d.t_event - Duration::hours(36) + Duration::seconds(rng.random_range(0.0..window) as i64))
            .collect();
        times.sort();
        times.dedup();
        let each = total / times.len() as f64;
        out.insert(
            mi,
            InsiderPlan {
                account_id,
                created_at,
                orders: times.into_iter().map(|t| (t, each)).collect(),
                funding_tag: if rng.random::<bool>() { FundingTag::Mixer } else { FundingTag::Unknown },
            },
        );
    }
    Ok(out)
}

struct AccountDraft {
    record: AccountRecord,
    trades: Vec<Trade>,
}

struct World<'a> {
    cfg: &'a WorldConfig,
    drafts: &'a [Draft],
    paths: &'a [Path],
}

impl World<'_> {
    fn trade(&self, account: &str, k: usize, mi: usize, side: Side, notional: f64, ts: Timestamp) -> Trade {
        let p = self.paths[mi].at(ts);
        Trade {
            trade_id: format!("{account}-{k:04}"),
            account_id: account.to_string(),
            market_id: self.drafts[mi].market.market_id.clone(),
            side,
            size: dec(notional / p, 2),
            price: dec(p, 4),
            ts,
        }
    }

    /// Uniform time in `[t_open, t_event)`, to the second.
    fn pre_event_time(&self, rng: &mut ChaCha8Rng, mi: usize) -> Timestamp {
        let d = &self.drafts[mi];
        let span = (d.t_event - d.market.t_open).num_seconds().max(1);
        d.market.t_open + Duration::seconds(rng.random_range(0..span))
    }

    fn old_account(&self, rng: &mut ChaCha8Rng, id: &str) -> AccountRecord {
        AccountRecord {
            account_id: id.to_string(),
            created_at: Some(self.cfg.start - secs(rng.random_range(30.0..365.0))),
            funding_tag: Some(if rng.random::<bool>() { FundingTag::Cex } else { FundingTag::Unknown }),
        }
    }

    fn noise(&self, id: &str, rng: &mut ChaCha8Rng) -> AccountDraft {
        let [lo, hi] = self.cfg.noise_events;
        let n = rng.random_range(lo..=hi).min(self.drafts.len());
        let markets = rand::seq::index::sample(rng, self.drafts.len(), n).into_vec();
        let mut trades = Vec::new();
        for mi in markets {
            for _ in 0..rng.random_range(1..=2) {
                let side = if rng.random::<bool>() { Side::Buy } else { Side::Sell };
                let ts = self.pre_event_time(rng, mi);
                let notional = uniform(rng, self.cfg.noise_notional);
                trades.push(self.trade(id, trades.len(), mi, side, notional, ts));
            }
        }
        AccountDraft { record: self.old_account(rng, id), trades }
    }

    fn skilled(&self, id: &str, rng: &mut ChaCha8Rng, home: Category) -> AccountDraft {
        let pool: Vec<usize> = (0..self.drafts.len())
            .filter(|&i| self.drafts[i].market.category == home)
            .collect();
        let n = self.cfg.skilled_events.min(pool.len());
        let picks = rand::seq::index::sample(rng, pool.len(), n).into_vec();
        let mut trades = Vec::new();
        for pi in picks {
            let mi = pool[pi];
            let win = self.drafts[mi].market.outcome.winning_side();
            let side = if rng.random::<f64>() < self.cfg.skilled_edge { win } else { win.flipped() };
            let ts = self.pre_event_time(rng, mi);
            let notional = uniform(rng, self.cfg.skilled_notional);
            trades.push(self.trade(id, trades.len(), mi, side, notional, ts));
        }
        AccountDraft { record: self.old_account(rng, id), trades }
    }

    fn sybil(&self, id: &str, rng: &mut ChaCha8Rng) -> AccountDraft {
        let eligible: Vec<usize> = (0..self.drafts.len())
            .filter(|&i| self.drafts[i].t_event - self.drafts[i].market.t_open >= Duration::days(2))
            .collect();
        let mi = eligible[rng.random_range(0..eligible.len())];
        let d = &self.drafts[mi];
        let created_at = d.t_event - secs(rng.random_range(1.6..6.5));
        let total = uniform(rng, self.cfg.sybil_notional);
        let k = rng.random_range(1..=2);
        let win = d.market.outcome.winning_side();
        let window = 36 * 3600 - 30 * 60;
        let mut trades = Vec::new();
        for _ in 0..k {
            let ts = d.t_event - Duration::hours(36) + Duration::seconds(rng.random_range(0..window));
            trades.push(self.trade(id, trades.len(), mi, win, total / k as f64, ts));
        }
        AccountDraft {
            record: AccountRecord {
                account_id: id.to_string(),
                created_at: Some(created_at),
                funding_tag: Some(FundingTag::Unknown),
            },
            trades,
        }
    }

    fn market_maker(&self, id: &str, rng: &mut ChaCha8Rng) -> AccountDraft {
        let n = self.cfg.market_maker_markets.min(self.drafts.len());
        let markets = rand::seq::index::sample(rng, self.drafts.len(), n).into_vec();
        let mut trades = Vec::new();
        for mi in markets {
            let ts = self.pre_event_time(rng, mi);
            let p = self.paths[mi].at(ts);
            let size = dec(self.cfg.market_maker_notional / p, 2);
            let bid = dec((p - 0.005).max(0.001), 4);
            let ask = dec((p + 0.005).min(0.999), 4);
            for (side, price) in [(Side::Buy, bid), (Side::Sell, ask)] {
                trades.push(Trade {
                    trade_id: format!("{id}-{:04}", trades.len()),
                    account_id: id.to_string(),
                    market_id: self.drafts[mi].market.market_id.clone(),
                    side,
                    size,
                    price,
                    ts,
                });
            }
        }
        AccountDraft { record: self.old_account(rng, id), trades }
    }
}

/// Generates a corpus and its labels. Identical configs give identical output.
pub fn generate_world(cfg: &WorldConfig) -> Result<(RawCorpus, GroundTruth), SynthError> {
    cfg.validate()?;
    let drafts = draft_markets(cfg);
    if drafts.is_empty() && Population::ALL.iter().any(|p| cfg.populations.count(*p) > 0) {
        return Err(SynthError::InvalidConfig("accounts need at least one market".into()));
    }
    let plans = plan_insiders(cfg, &drafts)?;
    let indices: Vec<usize> = (0..drafts.len()).collect();
    let built = par_map(&indices, |&i| build_path(cfg, &drafts[i], plans.get(&i)));
    let (paths, insider_trades): (Vec<Path>, Vec<Vec<Trade>>) = built.into_iter().unzip();

    let world = World { cfg, drafts: &drafts, paths: &paths };
    let homes: Vec<Category> = cfg
        .markets_per_category
        .iter()
        .filter(|(_, n)| **n > 0)
        .map(|(c, _)| *c)
        .collect();
    if cfg.populations.sybil > 0
        && !drafts.iter().any(|d| d.t_event - d.market.t_open >= Duration::days(2))
    {
        return Err(SynthError::InvalidConfig("no market can host a sybil".into()));
    }

    let specs: Vec<(Population, usize)> = [Population::Noise, Population::Skilled, Population::Sybil, Population::MarketMaker]
        .into_iter()
        .flat_map(|p| (0..cfg.populations.count(p)).map(move |i| (p, i)))
        .collect();
    let accounts = par_map(&specs, |&(pop, i)| {
        let id = account_id(cfg.seed, pop, i);
        let mut rng = rng_for(cfg.seed, &format!("account:{}:{i}", pop.tag()));
        let draft = match pop {
            Population::Noise => world.noise(&id, &mut rng),
            Population::Skilled => world.skilled(&id, &mut rng, homes[i % homes.len()]),
            Population::Sybil => world.sybil(&id, &mut rng),
            Population::MarketMaker => world.market_maker(&id, &mut rng),
            Population::Insider => unreachable!("insiders are planned with the paths"),
        };
        (pop, draft)
    });

    let mut truth = GroundTruth::default();
    let mut raw = RawCorpus {
        markets: drafts.iter().map(|d| d.market.clone()).collect(),
        events: Some(
            drafts
                .iter()
                .map(|d| EventRecord {
                    event_id: d.market.event_id.clone(),
                    t_event: Some(d.t_event),
                })
                .collect(),
        ),
        accounts: Some(Vec::new()),
        ..RawCorpus::default()
    };
    let listed = raw.accounts.as_mut().unwrap();
    for (pop, draft) in accounts {
        truth.accounts.insert(draft.record.account_id.clone(), pop);
        listed.push(draft.record);
        raw.trades.extend(draft.trades);
    }
    for (i, d) in drafts.iter().enumerate() {
        let informed: Decimal = insider_trades[i].iter().map(|t| t.notional()).sum();
        truth.markets.insert(
            d.market.market_id.clone(),
            MarketTruth {
                injected_leak: plans.contains_key(&i),
                price_coupled: plans.contains_key(&i) && cfg.insider_coupling,
                informed_notional: informed,
            },
        );
        if let Some(plan) = plans.get(&i) {
            truth.accounts.insert(plan.account_id.clone(), Population::Insider);
            listed.push(AccountRecord {
                account_id: plan.account_id.clone(),
                created_at: Some(plan.created_at),
                funding_tag: Some(plan.funding_tag),
            });
        }
    }
    raw.trades.extend(insider_trades.into_iter().flatten());
    raw.trades.sort_by(|a, b| (a.ts, &a.trade_id).cmp(&(b.ts, &b.trade_id)));
    listed.sort_by(|a, b| a.account_id.cmp(&b.account_id));
    raw.prices = drafts
        .iter()
        .zip(&paths)
        .flat_map(|(d, path)| {
            path.points.iter().map(|(ts, p)| PriceRecord {
                market_id: d.market.market_id.clone(),
                ts: *ts,
                price: dec(*p, 4),
            })
        })
        .collect();
    Ok((raw, truth))
}
