//! JSON Lines corpus files, ground-truth files, and deterministic reports.
//!
//! A corpus directory holds `markets.jsonl` and `trades.jsonl`, plus
//! optional `prices.jsonl`, `accounts.jsonl` and `events.jsonl`. Decimals are
//! strings and timestamps RFC 3339 UTC.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rust_decimal::Decimal;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::{
    AccountRecord, Corpus, EventRecord, Market, ModelError, PriceRecord, RawCorpus, Trade, ValidationReport,
};
use crate::pipeline::PipelineReport;
use crate::synth::{GroundTruth, MarketTruth, Population};

pub const MARKETS_FILE: &str = "markets.jsonl";
pub const TRADES_FILE: &str = "trades.jsonl";
pub const PRICES_FILE: &str = "prices.jsonl";
pub const ACCOUNTS_FILE: &str = "accounts.jsonl";
pub const EVENTS_FILE: &str = "events.jsonl";
pub const TRUTH_FILE: &str = "truth.jsonl";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {reason}", file.display())]
    Parse {
        file: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("corpus validation failed: {0}")]
    ValidationFailed(ValidationReport),
    #[error(transparent)]
    Model(ModelError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Per-record range checks applied while parsing.
trait Checked {
    fn check(&self) -> Result<(), String> {
        Ok(())
    }
}

fn check_price(p: Decimal) -> Result<(), String> {
    if p < Decimal::ZERO || p > Decimal::ONE {
        return Err(format!("price {p} outside [0,1]"));
    }
    Ok(())
}

impl Checked for Trade {
    fn check(&self) -> Result<(), String> {
        check_price(self.price)?;
        if self.size < Decimal::ZERO {
            return Err(format!("negative size {}", self.size));
        }
        Ok(())
    }
}

impl Checked for PriceRecord {
    fn check(&self) -> Result<(), String> {
        check_price(self.price)
    }
}

impl Checked for Market {}
impl Checked for AccountRecord {}
impl Checked for EventRecord {}
impl Checked for TruthRecord {}

fn read_jsonl<T: DeserializeOwned + Checked>(path: &Path) -> Result<Vec<T>, IoError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let parse = |reason: String| IoError::Parse {
            file: path.to_path_buf(),
            line: i + 1,
            reason,
        };
        let record: T = serde_json::from_str(&line).map_err(|e| parse(e.to_string()))?;
        record.check().map_err(parse)?;
        out.push(record);
    }
    Ok(out)
}

fn read_optional<T: DeserializeOwned + Checked>(path: &Path) -> Result<Option<Vec<T>>, IoError> {
    if path.exists() {
        read_jsonl(path).map(Some)
    } else {
        Ok(None)
    }
}

fn jsonl_bytes<T: Serialize>(records: &[T]) -> Vec<u8> {
    let mut buf = Vec::new();
    for r in records {
        serde_json::to_writer(&mut buf, r).expect("records serialize");
        buf.push(b'\n');
    }
    buf
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(bytes).map_err(io_err(path))
}

/// Reads the corpus files of `dir` without validating them.
pub fn read_raw_corpus(dir: &Path) -> Result<RawCorpus, IoError> {
    Ok(RawCorpus {
        markets: read_jsonl(&dir.join(MARKETS_FILE))?,
        trades: read_jsonl(&dir.join(TRADES_FILE))?,
        prices: read_optional(&dir.join(PRICES_FILE))?.unwrap_or_default(),
        accounts: read_optional(&dir.join(ACCOUNTS_FILE))?,
        events: read_optional(&dir.join(EVENTS_FILE))?,
    })
}

/// Reads, validates and indexes the corpus in `dir`.
pub fn load_corpus(dir: &Path) -> Result<Corpus, IoError> {
    Corpus::build(read_raw_corpus(dir)?).map_err(|e| match e {
        ModelError::ValidationFailed(r) => IoError::ValidationFailed(r),
        other => IoError::Model(other),
    })
}

/// Writes every present section of `raw` into `dir`, creating it if needed.
pub fn write_corpus(dir: &Path, raw: &RawCorpus) -> Result<(), IoError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_file(&dir.join(MARKETS_FILE), &jsonl_bytes(&raw.markets))?;
    write_file(&dir.join(TRADES_FILE), &jsonl_bytes(&raw.trades))?;
    if !raw.prices.is_empty() {
        write_file(&dir.join(PRICES_FILE), &jsonl_bytes(&raw.prices))?;
    }
    if let Some(a) = &raw.accounts {
        write_file(&dir.join(ACCOUNTS_FILE), &jsonl_bytes(a))?;
    }
    if let Some(e) = &raw.events {
        write_file(&dir.join(EVENTS_FILE), &jsonl_bytes(e))?;
    }
    Ok(())
}

/// SHA-256 over the canonical serialization of the corpus, with derived
/// records made explicit.
pub fn corpus_digest(corpus: &Corpus) -> String {
    let raw = corpus.to_raw();
    let mut h = Sha256::new();
    for (name, bytes) in [
        (MARKETS_FILE, jsonl_bytes(&raw.markets)),
        (TRADES_FILE, jsonl_bytes(&raw.trades)),
        (PRICES_FILE, jsonl_bytes(&raw.prices)),
        (ACCOUNTS_FILE, jsonl_bytes(raw.accounts.as_deref().unwrap_or_default())),
        (EVENTS_FILE, jsonl_bytes(raw.events.as_deref().unwrap_or_default())),
    ] {
        h.update(name.as_bytes());
        h.update([0u8]);
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(&bytes);
    }
    format!("{:x}", h.finalize())
}

fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum TruthRecord {
    Account {
        account_id: String,
        population: Population,
    },
    Market {
        market_id: String,
        injected_leak: bool,
        price_coupled: bool,
        informed_notional: Decimal,
    },
}

pub fn write_truth(path: &Path, truth: &GroundTruth) -> Result<(), IoError> {
    let mut records: Vec<TruthRecord> = truth
        .accounts
        .iter()
        .map(|(id, p)| TruthRecord::Account {
            account_id: id.clone(),
            population: *p,
        })
        .collect();
    records.extend(truth.markets.iter().map(|(id, m)| TruthRecord::Market {
        market_id: id.clone(),
        injected_leak: m.injected_leak,
        price_coupled: m.price_coupled,
        informed_notional: m.informed_notional,
    }));
    write_file(path, &jsonl_bytes(&records))
}

pub fn read_truth(path: &Path) -> Result<GroundTruth, IoError> {
    let mut truth = GroundTruth::default();
    for r in read_jsonl::<TruthRecord>(path)? {
        match r {
            TruthRecord::Account { account_id, population } => {
                truth.accounts.insert(account_id, population);
            }
            TruthRecord::Market {
                market_id,
                injected_leak,
                price_coupled,
                informed_notional,
            } => {
                truth.markets.insert(
                    market_id,
                    MarketTruth {
                        injected_leak,
                        price_coupled,
                        informed_notional,
                    },
                );
            }
        }
    }
    Ok(truth)
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap();
            let r = (x * 1e9).round() / 1e9;
            *v = serde_json::Number::from_f64(if r == 0.0 { 0.0 } else { r })
                .map(Value::Number)
                .unwrap_or(Value::Null);
        }
        Value::Array(a) => a.iter_mut().for_each(round_floats),
        Value::Object(o) => o.values_mut().for_each(round_floats),
        _ => {}
    }
}

/// Canonical JSON: sorted keys, floats rounded to 1e-9, trailing newline.
pub fn canonical_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_value(value).expect("report serializes");
    round_floats(&mut v);
    let mut out = serde_json::to_vec_pretty(&v).expect("value serializes");
    out.push(b'\n');
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

pub const CSV_HEADER: [&str; 6] = ["market_id", "ils_dl", "short_window", "flagged_accounts", "holdings", "skip_reason"];

/// Review queue as CSV: one row per stage-3 market.
pub fn review_csv(report: &PipelineReport) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for e in &report.stage3 {
        let accounts: Vec<&str> = e.accounts.iter().map(|h| h.account_id.as_str()).collect();
        let holdings: Vec<String> = e.accounts.iter().map(|h| format!("{:.6}", h.holding_fraction)).collect();
        w.write_record([
            e.market_id.clone(),
            format!("{:.9}", e.ils.ils_dl),
            e.ils.short_window_value.map(|v| format!("{v:.9}")).unwrap_or_default(),
            accounts.join(";"),
            holdings.join(";"),
            String::new(),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Writes the report and returns the SHA-256 of the bytes written.
pub fn emit_report(report: &PipelineReport, format: ReportFormat, out_path: &Path) -> Result<String, IoError> {
    let bytes = match format {
        ReportFormat::Json => canonical_json(report),
        ReportFormat::Csv => review_csv(report),
    };
    write_file(out_path, &bytes)?;
    Ok(sha256_hex(&bytes))
}

/// Reads a report written by [`emit_report`] in JSON form.
pub fn read_report(path: &Path) -> Result<PipelineReport, IoError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| IoError::Parse {
        file: path.to_path_buf(),
        line: e.line(),
        reason: e.to_string(),
    })
}
