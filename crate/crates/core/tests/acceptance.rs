//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::path::Path;
use std::time::{Duration as StdDuration, Instant};

use chrono::{Duration, TimeZone, Utc};
use leakwatch::config::AnalysisConfig;
use leakwatch::ils::{fit_hazard, ils_at_anchor, ils_dl, scope_gate, IlsParams};
use leakwatch::io::{canonical_json, load_corpus};
use leakwatch::model::{Category, Corpus, Market, Outcome, PricePoint, PriceSeries, Timestamp};
use leakwatch::parallel::with_workers;
use leakwatch::pipeline::{run_pipeline, PipelineReport};
use leakwatch::screens::{lifecycle_flag, LifecycleConfig};
use leakwatch::signrand::{
    classify_accounts, exact_p_value, monte_carlo_p_value, persistence_retention, stream_seed, ClassifyScope,
    MarketMakerConfig, NullSpec, SkillCategory,
};
use leakwatch::synth::{evaluate_detection, generate_world, Populations, WorldConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rust_decimal::Decimal;
use rust_decimal_macros::dec;

type Outcome_ = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome_ {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn corpus_of(cfg: &WorldConfig) -> Corpus {
    Corpus::build(generate_world(cfg).expect("world").0).expect("valid world")
}

fn null_calibration() -> Outcome_ {
    let started = Instant::now();
    let corpus = corpus_of(&WorldConfig::noise_only(101, 5000, [10, 30]));
    let rows = classify_accounts(
        &corpus,
        None,
        &NullSpec { draws: 10_000, master_seed: 1, min_events: 10 },
        &MarketMakerConfig::default(),
        &ClassifyScope::platform(),
    )
    .map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    let classified: Vec<_> = rows.iter().filter(|r| r.category.is_classified()).collect();
    let skilled = classified.iter().filter(|r| r.category == SkillCategory::SkilledWinner).count();
    let rate = skilled as f64 / classified.len() as f64;
    check(
        classified.len() == 5000 && (0.04..=0.06).contains(&rate) && elapsed <= StdDuration::from_secs(60),
        format!("skilled rate {rate:.4} over {} accounts in {:.1}s", classified.len(), elapsed.as_secs_f64()),
    )
}

fn enumeration_oracle() -> Outcome_ {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut close = 0;
    let mut worst = 0.0f64;
    for i in 0..200 {
        let n = rng.random_range(3..=12);
        let pnls: Vec<Decimal> = (0..n)
            .map(|_| Decimal::new(rng.random_range(-100_000i64..=100_000), 2))
            .collect();
        let exact = exact_p_value(&pnls).map_err(|e| e.to_string())?.p_value;
        let mc = monte_carlo_p_value(&pnls, 10_000, stream_seed(7, &format!("oracle:{i}")))
            .map_err(|e| e.to_string())?
            .p_value;
        let d = (mc - exact).abs();
        worst = worst.max(d);
        close += (d <= 0.02) as usize;
    }
    check(close >= 190, format!("{close}/200 within 0.02, worst {worst:.4}"))
}

fn lifecycle_fixture() -> Outcome_ {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/maduro");
    let corpus = load_corpus(&dir).map_err(|e| e.to_string())?;
    let cfg = LifecycleConfig {
        window_days: 10.0,
        max_external_volume_fraction: 0.2,
        ..LifecycleConfig::default()
    };
    let expected = [
        ("0x31a...b8ed9", dec!(409882.03), dec!(33933.26)),
        ("0x6ba...a94c5", dec!(141619.92), dec!(25089.86)),
        ("0xa72...febd4", dec!(74982.34), dec!(5782.66)),
    ];
    let mut total = Decimal::ZERO;
    let mut ok = true;
    for (id, pnl, vol) in expected {
        let f = lifecycle_flag(&corpus, id, "absolute-resolve", &cfg).map_err(|e| e.to_string())?;
        ok &= f.flagged && f.realized_profit == pnl && f.gross_volume == vol;
        total += f.realized_profit;
    }
    let total = total.round_dp(2);
    check(ok && total == dec!(626484.29), format!("3 accounts flagged, combined profit {total}"))
}

fn at(days: i64, hours: i64) -> Timestamp {
    Utc.with_ymd_and_hms(2026, 1, 1, 0, 0, 0).unwrap() + Duration::days(days) + Duration::hours(hours)
}

fn fixture_market() -> Market {
    Market {
        market_id: "m".into(),
        event_id: "e".into(),
        category: Category::Politics,
        t_open: at(0, 0),
        t_deadline: Some(at(20, 0)),
        t_event: Some(at(10, 0)),
        t_resolve: at(20, 0),
        outcome: Outcome::Yes,
    }
}

fn series(points: &[(Timestamp, Decimal)]) -> PriceSeries {
    PriceSeries::new("m", points.iter().map(|&(ts, price)| PricePoint { ts, price }).collect()).unwrap()
}

fn ils_fixture() -> Outcome_ {
    let s = series(&[
        (at(0, 0), dec!(0.30)),
        (at(5, 0), dec!(0.3791)),
        (at(12, 0), dec!(0.0683)),
        (at(20, 0), dec!(1)),
    ]);
    let m = fixture_market();
    let p = IlsParams::default();
    let event = ils_dl(&s, &m, &p).map_err(|e| e.to_string())?;
    let proxy = ils_at_anchor(&s, &m, m.t_resolve - Duration::hours(1), &p).map_err(|e| e.to_string())?;
    let diff = event.ils_dl - proxy;
    check(
        (event.ils_dl - 0.113).abs() <= 0.001
            && (proxy + 0.331).abs() <= 0.001
            && (diff - 0.444).abs() <= 0.002
            && event.gate.admitted,
        format!("event {:.4}, proxy {proxy:.4}, difference {diff:.4}, admitted {}", event.ils_dl, event.gate.admitted),
    )
}

fn scope_gates() -> Outcome_ {
    let p = IlsParams::default();
    let m = fixture_market();
    let edge = scope_gate(&series(&[(at(0, 0), dec!(0.95)), (at(11, 0), dec!(1))]), &m, &p).unwrap();
    let trivial = scope_gate(&series(&[(at(0, 0), dec!(0.97)), (at(11, 0), dec!(1))]), &m, &p).unwrap();
    let mut saw = vec![(at(0, 0), dec!(0.4))];
    for i in -15i64..=15 {
        saw.push((at(10, 0) + Duration::minutes(i), if i % 2 == 0 { dec!(0.3) } else { dec!(0.7) }));
    }
    let sawtooth = scope_gate(&series(&saw), &m, &p).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut monotone = true;
    for _ in 0..500 {
        let mut pts = vec![(at(0, 0), Decimal::new(rng.random_range(1..10_000), 4))];
        let mut t = at(0, 0);
        for _ in 0..rng.random_range(1..40) {
            t += Duration::minutes(rng.random_range(1..2000));
            pts.push((t, Decimal::new(rng.random_range(0..=10_000), 4)));
        }
        let m = Market {
            t_event: Some(at(0, 0) + Duration::minutes(rng.random_range(11..80_000))),
            outcome: if rng.random() { Outcome::Yes } else { Outcome::No },
            ..fixture_market()
        };
        let (a, b) = (rng.random_range(0.0..0.6), rng.random_range(0.0..0.6));
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let s = series(&pts);
        let strict = scope_gate(&s, &m, &IlsParams { epsilon: hi, ..p.clone() }).unwrap();
        let loose = scope_gate(&s, &m, &IlsParams { epsilon: lo, ..p.clone() }).unwrap();
        monotone &= !strict.admitted || loose.admitted;
    }
    check(
        !edge.edge_effect_ok
            && !edge.admitted
            && !trivial.nontrivial_move_ok
            && !trivial.admitted
            && !sawtooth.anchor_stable_ok
            && !sawtooth.admitted
            && monotone,
        format!(
            "edge rejected {}, trivial rejected {}, sawtooth rejected {} (deviation {:.3}), monotone over 500 paths {monotone}",
            !edge.admitted,
            !trivial.admitted,
            !sawtooth.admitted,
            sawtooth.max_anchor_deviation.unwrap_or(f64::NAN)
        ),
    )
}

/// Chi-square CDF for even degrees of freedom `2k`: one minus a Poisson tail.
fn chi2_even_cdf(x: f64, k: u32) -> f64 {
    let h = x / 2.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..k {
        term *= h / j as f64;
        sum += term;
    }
    1.0 - (-h).exp() * sum
}

fn chi2_even_quantile(p: f64, k: u32) -> f64 {
    let (mut lo, mut hi) = (0.0, 1000.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if chi2_even_cdf(mid, k) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn hazard_fixture() -> Outcome_ {
    let mut taus: Vec<f64> = (0..17).map(|i| 1.0 + 0.4 * i as f64).collect();
    let rest: f64 = taus.iter().sum();
    taus.push(74.689 - rest);
    let fit = fit_hazard(&taus).map_err(|e| e.to_string())?;
    let oracle = [
        chi2_even_quantile(0.025, 18) / (2.0 * 74.689),
        chi2_even_quantile(0.975, 18) / (2.0 * 74.689),
    ];
    let matches_oracle = (fit.ci95[0] - oracle[0]).abs() < 1e-6 && (fit.ci95[1] - oracle[1]).abs() < 1e-6;
    let matches_fixture = (fit.lambda_hat - 0.241).abs() <= 0.001
        && (fit.ci95[0] - 0.143).abs() <= 0.001
        && (fit.ci95[1] - 0.365).abs() <= 0.001
        && (fit.half_life - 2.88).abs() <= 0.01;

    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let exp = Exp::new(0.241).unwrap();
    let mut covered = 0;
    for _ in 0..500 {
        let sample: Vec<f64> = (0..18).map(|_| exp.sample(&mut rng)).collect();
        let f = fit_hazard(&sample).map_err(|e| e.to_string())?;
        covered += (f.ci95[0] <= 0.241 && 0.241 <= f.ci95[1]) as usize;
    }
    let coverage = covered as f64 / 500.0;
    check(
        matches_oracle && matches_fixture && (0.92..=0.98).contains(&coverage),
        format!(
            "lambda {:.4}, CI [{:.4}, {:.4}], half-life {:.3} d, coverage {coverage:.3}",
            fit.lambda_hat, fit.ci95[0], fit.ci95[1], fit.half_life
        ),
    )
}

fn persistence() -> Outcome_ {
    let spec = NullSpec { draws: 10_000, master_seed: 3, min_events: 10 };
    let mm = MarketMakerConfig::default();
    let noise = corpus_of(&WorldConfig::noise_only(707, 12_000, [24, 24]));
    let noise_rate = persistence_retention(&noise, &spec, &mm, 11)
        .map_err(|e| e.to_string())?
        .retention_rate_skilled
        .ok_or("no noise account was skilled on the training half")?;
    let strong_cfg = WorldConfig {
        seed: 708,
        populations: Populations { noise: 0, skilled: 200, insider: 0, sybil: 0, market_maker: 0 },
        skilled_edge: 0.9,
        skilled_events: 40,
        ..WorldConfig::default()
    };
    let strong_rate = persistence_retention(&corpus_of(&strong_cfg), &spec, &mm, 11)
        .map_err(|e| e.to_string())?
        .retention_rate_skilled
        .ok_or("no strong-edge account was skilled on the training half")?;
    check(
        (noise_rate - 0.05).abs() <= 0.02 && strong_rate >= 0.5 && strong_rate > noise_rate,
        format!("noise retention {noise_rate:.4}, strong-edge retention {strong_rate:.4}"),
    )
}

fn queued(r: &PipelineReport) -> Vec<String> {
    r.stage3.iter().map(|e| e.market_id.clone()).collect()
}

fn pipeline_end_to_end() -> Outcome_ {
    let cfg = AnalysisConfig::default();
    let world = WorldConfig { seed: 808, insider_coupling: true, ..WorldConfig::default() };
    let (raw, truth) = generate_world(&world).map_err(|e| e.to_string())?;
    let corpus = Corpus::build(raw).map_err(|e| e.to_string())?;
    let report = run_pipeline(&corpus, &cfg);
    let flagged: Vec<String> = report.stage1.flagged.iter().map(|r| r.account_id.clone()).collect();
    let eval = evaluate_detection(&flagged, &queued(&report), &truth).map_err(|e| e.to_string())?;
    let recall = eval.market_recall.unwrap_or(0.0);

    let noise = corpus_of(&WorldConfig::noise_only(809, 400, [10, 30]));
    let noise_report = run_pipeline(&noise, &cfg);
    let noise_share = noise_report.stage3.len() as f64 / noise_report.markets as f64;

    let stage2: BTreeSet<&str> = report.stage2.queue.iter().map(|e| e.market_id.as_str()).collect();
    let flagged_ids: BTreeSet<&str> = flagged.iter().map(String::as_str).collect();
    let contained = report.stage3.iter().all(|e| stage2.contains(e.market_id.as_str()))
        && report.stage2.queue.iter().all(|e| {
            e.accounts.iter().any(|h| {
                flagged_ids.contains(h.account_id.as_str()) && h.holding_fraction >= cfg.pipeline.holding_fraction
            })
        });

    let base = report.stage3.len();
    let mut monotone = true;
    for bump in 0..4 {
        let mut stricter = cfg.clone();
        let p = &mut stricter.pipeline;
        match bump {
            0 => p.stage1_threshold += 1.0,
            1 => p.holding_fraction = 0.3,
            2 => p.ils_threshold = 0.5,
            _ => p.short_window_threshold = 0.3,
        }
        monotone &= run_pipeline(&corpus, &stricter).stage3.len() <= base;
    }

    let bytes: Vec<Vec<u8>> = [1, 4, 16]
        .into_iter()
        .map(|w| with_workers(Some(w), || canonical_json(&run_pipeline(&corpus, &cfg))))
        .collect();
    let identical = bytes.windows(2).all(|w| w[0] == w[1]);

    check(
        recall >= 0.8 && noise_share <= 0.01 && contained && monotone && identical,
        format!(
            "market recall {recall:.2} ({} queued, account recall {:.2}, sybils flagged {}), noise-world queue share {noise_share:.4}, containment {contained}, monotone {monotone}, identical at 1/4/16 workers {identical}",
            eval.markets_queued,
            eval.recall,
            eval.by_population[&leakwatch::synth::Population::Sybil].flagged
        ),
    )
}

fn scale_invariance() -> Outcome_ {
    let world = WorldConfig {
        seed: 909,
        markets_per_category: Category::ALL.iter().map(|c| (*c, 16)).collect(),
        populations: Populations { noise: 150, skilled: 20, insider: 0, sybil: 0, market_maker: 2 },
        skilled_events: 16,
        market_maker_markets: 55,
        ..WorldConfig::default()
    };
    let (raw, _) = generate_world(&world).map_err(|e| e.to_string())?;
    let mut scaled = raw.clone();
    for t in &mut scaled.trades {
        t.size *= Decimal::from(100);
    }
    let (a, b) = (Corpus::build(raw).unwrap(), Corpus::build(scaled).unwrap());
    let spec = NullSpec { master_seed: 42, ..NullSpec::default() };
    let mm = MarketMakerConfig::default();
    let mut same = 0;
    let mut total = 0;
    let mut mismatch = 0;
    for scope in std::iter::once(ClassifyScope::platform()).chain(Category::ALL.map(ClassifyScope::category)) {
        let ra = classify_accounts(&a, None, &spec, &mm, &scope).map_err(|e| e.to_string())?;
        let rb = classify_accounts(&b, None, &spec, &mm, &scope).map_err(|e| e.to_string())?;
        for (x, y) in ra.iter().zip(&rb) {
            total += 1;
            let p_same = x.p_value.map(f64::to_bits) == y.p_value.map(f64::to_bits);
            if x.category == y.category && p_same {
                same += 1;
            } else {
                mismatch += 1;
            }
        }
    }
    check(mismatch == 0, format!("{same}/{total} classifications and p-values bit-identical"))
}

type Criterion = (&'static str, fn() -> Outcome_);

fn main() {
    let criteria: [Criterion; 9] = [
        ("null calibration", null_calibration),
        ("enumeration oracle", enumeration_oracle),
        ("lifecycle fixture", lifecycle_fixture),
        ("ILS fixture", ils_fixture),
        ("scope gates", scope_gates),
        ("hazard fixture", hazard_fixture),
        ("persistence", persistence),
        ("pipeline end-to-end", pipeline_end_to_end),
        ("scale invariance", scale_invariance),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let (status, detail) = match run() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "criterion {} {name}: {status} ({detail}) [{:.1}s]",
            i + 1,
            started.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
