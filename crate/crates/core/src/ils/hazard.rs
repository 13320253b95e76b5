use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::model::{Category, Corpus};
use crate::stats::{chi_square_quantile, ks_p_value, ks_statistic};

use super::IlsError;

/// Exponential lead-time fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HazardFit {
    pub n: usize,
    pub sum_tau: f64,
    pub lambda_hat: f64,
    pub ci95: [f64; 2],
    pub half_life: f64,
    pub ks_statistic: f64,
    pub ks_p: f64,
    /// The KS p-value uses the fitted rate, so it is optimistic.
    pub ks_approximate: bool,
}

/// Survival of the exponential model, `exp(-lambda * tau)`.
pub fn survival(lambda: f64, tau: f64) -> f64 {
    (-lambda * tau).exp()
}

/// Maximum-likelihood rate with the exact chi-square interval.
///
/// `2 * lambda * sum(tau)` is chi-square with `2n` degrees of freedom, so
/// the 95% interval is `[chi2(0.025; 2n), chi2(0.975; 2n)] / (2 * sum(tau))`.
pub fn fit_hazard(taus: &[f64]) -> Result<HazardFit, IlsError> {
    if taus.is_empty() {
        return Err(IlsError::EmptySample);
    }
    if let Some(&bad) = taus.iter().find(|t| !(**t > 0.0) || !t.is_finite()) {
        return Err(IlsError::NonPositiveDuration(bad));
    }
    let n = taus.len();
    let sum_tau: f64 = taus.iter().sum();
    let lambda_hat = n as f64 / sum_tau;
    let dof = 2.0 * n as f64;
    let ci95 = [
        chi_square_quantile(0.025, dof) / (2.0 * sum_tau),
        chi_square_quantile(0.975, dof) / (2.0 * sum_tau),
    ];
    let (ks_statistic, ks_p) = ks_exponential(taus, lambda_hat);
    Ok(HazardFit {
        n,
        sum_tau,
        lambda_hat,
        ci95,
        half_life: LN_2 / lambda_hat,
        ks_statistic,
        ks_p,
        ks_approximate: true,
    })
}

/// One-sample KS statistic and p-value against `Exp(rate)`.
pub fn ks_exponential(taus: &[f64], rate: f64) -> (f64, f64) {
    let d = ks_statistic(taus, |x| 1.0 - (-rate * x).exp());
    (d, ks_p_value(d, taus.len()))
}

/// Positive lead times (days) of markets with a known event time.
pub fn lead_times(corpus: &Corpus, category: Option<Category>) -> Vec<f64> {
    corpus
        .markets()
        .filter(|m| category.is_none_or(|c| m.category == c))
        .filter_map(|m| m.lead_time_days())
        .filter(|t| *t > 0.0)
        .collect()
}
