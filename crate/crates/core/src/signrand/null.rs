use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::SignRandError;

/// Largest event count scored by full enumeration in automatic mode.
pub const EXACT_MAX_EVENTS: usize = 12;
/// Hard limit for explicit enumeration requests (2^24 sign vectors).
pub const EXACT_HARD_LIMIT: usize = 24;

/// Fractional digits kept when mapping event PnLs onto the integer lattice.
const LATTICE_DP: u32 = 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NullSpec {
    pub draws: u32,
    pub master_seed: u64,
    pub min_events: usize,
}

impl Default for NullSpec {
    fn default() -> Self {
        Self {
            draws: 10_000,
            master_seed: 0,
            min_events: 10,
        }
    }
}

impl NullSpec {
    pub fn validate(&self) -> Result<(), String> {
        if self.draws == 0 {
            return Err("null.draws must be >= 1".into());
        }
        if self.min_events == 0 {
            return Err("null.min_events must be >= 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PValueMethod {
    Exact,
    MonteCarlo,
}

/// Shape of the simulated null, in dollars.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullSummary {
    pub method: PValueMethod,
    /// Sign vectors evaluated: `2^n` when exact, `draws` otherwise.
    pub samples: u64,
    /// Sign vectors whose PnL is at least the realized PnL.
    pub at_least_realized: u64,
    pub mean: f64,
    pub std_dev: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullOutcome {
    pub p_value: f64,
    pub realized: Decimal,
    pub summary: NullSummary,
}

/// Event PnLs mapped to a primitive integer vector.
///
/// Dividing out the common factor makes the vector, and therefore every
/// comparison against the realized total, identical under any positive
/// rescaling of the inputs.
#[derive(Debug, Clone)]
struct Lattice {
    units: Vec<i128>,
    /// Dollars per lattice unit.
    unit: f64,
}

impl Lattice {
    fn new(pnls: &[Decimal]) -> Lattice {
        let scale = 10i128.pow(LATTICE_DP);
        let raw: Vec<i128> = pnls
            .iter()
            .map(|d| {
                let r = d.round_dp(LATTICE_DP);
                r.mantissa() * 10i128.pow(LATTICE_DP - r.scale())
            })
            .collect();
        let g = raw.iter().fold(0i128, |acc, &v| gcd(acc, v.abs()));
        if g == 0 {
            return Lattice {
                units: raw,
                unit: 0.0,
            };
        }
        Lattice {
            units: raw.iter().map(|v| v / g).collect(),
            unit: g as f64 / scale as f64,
        }
    }

    fn realized(&self) -> i128 {
        self.units.iter().sum()
    }

    /// PnL of the sign vector whose set bits mark flipped events.
    #[inline]
    fn flipped_sum(&self, words: &[u64]) -> i128 {
        self.units
            .iter()
            .enumerate()
            .map(|(e, &m)| ((words[e / 64] >> (e % 64)) & 1) as i128 * m)
            .sum()
    }
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Seed of the RNG substream for `key` under `master_seed`.
pub fn stream_seed(master_seed: u64, key: &str) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(master_seed.to_le_bytes());
    h.update(key.as_bytes());
    h.finalize().into()
}

/// Sign-randomization p-value, by enumeration for up to
/// [`EXACT_MAX_EVENTS`] events and by Monte Carlo beyond.
///
/// `stream_key` identifies the RNG substream (account and scope), so the
/// result does not depend on which worker computes it.
pub fn null_p_value(
    event_pnls: &[Decimal],
    spec: &NullSpec,
    stream_key: &str,
) -> Result<NullOutcome, SignRandError> {
    if event_pnls.len() <= EXACT_MAX_EVENTS {
        exact_p_value(event_pnls)
    } else {
        monte_carlo_p_value(
            event_pnls,
            spec.draws,
            stream_seed(spec.master_seed, stream_key),
        )
    }
}

/// Upper-tail p-value over all `2^n` sign vectors: `#{PnL(s) >= realized} / 2^n`.
pub fn exact_p_value(event_pnls: &[Decimal]) -> Result<NullOutcome, SignRandError> {
    let n = event_pnls.len();
    if n == 0 {
        return Err(SignRandError::EmptyHistory);
    }
    if n > EXACT_HARD_LIMIT {
        return Err(SignRandError::TooManyEventsForExact(n));
    }
    let lattice = Lattice::new(event_pnls);
    let realized = lattice.realized();
    let total = 1u64 << n;
    let mut hits = 0u64;
    let mut acc = Moments::default();
    for mask in 0..total {
        let flipped = lattice.flipped_sum(&[mask]);
        if flipped <= 0 {
            hits += 1;
        }
        acc.push((realized - 2 * flipped) as f64 * lattice.unit);
    }
    let (mean, std_dev) = acc.finish();
    Ok(NullOutcome {
        p_value: hits as f64 / total as f64,
        realized: event_pnls.iter().sum(),
        summary: NullSummary {
            method: PValueMethod::Exact,
            samples: total,
            at_least_realized: hits,
            mean,
            std_dev,
        },
    })
}

/// Monte Carlo upper-tail p-value with plus-one correction:
/// `(1 + #{sim >= realized}) / (draws + 1)`.
pub fn monte_carlo_p_value(
    event_pnls: &[Decimal],
    draws: u32,
    seed: [u8; 32],
) -> Result<NullOutcome, SignRandError> {
    if event_pnls.is_empty() {
        return Err(SignRandError::EmptyHistory);
    }
    let lattice = Lattice::new(event_pnls);
    let realized = lattice.realized();
    let mut rng = ChaCha8Rng::from_seed(seed);
    let mut words = vec![0u64; event_pnls.len().div_ceil(64)];
    let mut hits = 0u64;
    let mut acc = Moments::default();
    for _ in 0..draws {
        words.iter_mut().for_each(|w| *w = rng.next_u64());
        let flipped = lattice.flipped_sum(&words);
        // sim = realized - 2 * flipped
        if flipped <= 0 {
            hits += 1;
        }
        acc.push((realized - 2 * flipped) as f64 * lattice.unit);
    }
    let (mean, std_dev) = acc.finish();
    Ok(NullOutcome {
        p_value: (1 + hits) as f64 / (draws as f64 + 1.0),
        realized: event_pnls.iter().sum(),
        summary: NullSummary {
            method: PValueMethod::MonteCarlo,
            samples: draws as u64,
            at_least_realized: hits,
            mean,
            std_dev,
        },
    })
}

/// Simulated null PnLs (dollars), one per draw.
pub fn simulate_null(event_pnls: &[Decimal], draws: u32, seed: [u8; 32]) -> Vec<f64> {
    let lattice = Lattice::new(event_pnls);
    let realized = lattice.realized();
    let mut rng = ChaCha8Rng::from_seed(seed);
    let mut words = vec![0u64; event_pnls.len().div_ceil(64).max(1)];
    (0..draws)
        .map(|_| {
            words.iter_mut().for_each(|w| *w = rng.next_u64());
            (realized - 2 * lattice.flipped_sum(&words)) as f64 * lattice.unit
        })
        .collect()
}

#[derive(Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn finish(&self) -> (f64, f64) {
        if self.n < 1.0 {
            return (0.0, 0.0);
        }
        (self.mean, (self.m2 / self.n).sqrt())
    }
}
