//! Effective sample size in the distribution bulk and tails.
//!
//! Autocorrelations are combined across split chains and truncated with
//! Geyer's initial positive (and monotone) pair-sum rule.

use super::rank::{rank_normalize, split_chains};
use super::rhat::{is_degenerate, validate_chains};
use super::DiagValue;
use crate::error::Result;
use crate::math;

/// Bulk ESS: computed on rank-normalized split chains.
pub fn ess_bulk(chains: &[Vec<f64>]) -> Result<DiagValue> {
    validate_chains(chains)?;
    if is_degenerate(chains) {
        return Ok(DiagValue {
            value: f64::NAN,
            degenerate: true,
        });
    }
    Ok(ess_core(&rank_normalize(&split_chains(chains))))
}

/// Tail ESS: the smaller of the ESS of the 5% and 95% quantile
/// exceedance indicators.
pub fn ess_tail(chains: &[Vec<f64>]) -> Result<DiagValue> {
    validate_chains(chains)?;
    if is_degenerate(chains) {
        return Ok(DiagValue {
            value: f64::NAN,
            degenerate: true,
        });
    }
    let halves = split_chains(chains);
    let mut pooled: Vec<f64> = halves.iter().flatten().copied().collect();
    pooled.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q05 = math::quantile_sorted(&pooled, 0.05);
    let q95 = math::quantile_sorted(&pooled, 0.95);

    let indicator_ess = |q: f64| -> DiagValue {
        let indicator: Vec<Vec<f64>> = halves
            .iter()
            .map(|c| c.iter().map(|&v| if v <= q { 1.0 } else { 0.0 }).collect())
            .collect();
        if indicator
            .iter()
            .all(|c| c.iter().all(|&v| v == indicator[0][0]))
        {
            return DiagValue {
                value: f64::NAN,
                degenerate: true,
            };
        }
        ess_core(&indicator)
    };

    let lo = indicator_ess(q05);
    let hi = indicator_ess(q95);
    if lo.degenerate || hi.degenerate {
        return Ok(DiagValue {
            value: f64::NAN,
            degenerate: true,
        });
    }
    Ok(DiagValue {
        value: lo.value.min(hi.value),
        degenerate: false,
    })
}

/// Multi-chain ESS on already-transformed chains.
fn ess_core(chains: &[Vec<f64>]) -> DiagValue {
    let m = chains.len();
    let n = chains[0].len();
    let means: Vec<f64> = chains.iter().map(|c| math::mean(c)).collect();
    let vars: Vec<f64> = chains.iter().map(|c| math::variance(c)).collect();
    let within = math::mean(&vars);
    let var_plus = within * (n as f64 - 1.0) / n as f64 + math::variance(&means);
    if !(var_plus > 0.0) || !var_plus.is_finite() {
        return DiagValue {
            value: f64::NAN,
            degenerate: true,
        };
    }

    // Mean autocovariance at one lag (biased, 1/n normalization).
    let acov = |lag: usize| -> f64 {
        let mut total = 0.0;
        for (chain, mean) in chains.iter().zip(&means) {
            let mut s = 0.0;
            for i in 0..(n - lag) {
                s += (chain[i] - mean) * (chain[i + lag] - mean);
            }
            total += s / n as f64;
        }
        total / m as f64
    };
    let rho = |lag: usize| 1.0 - (within - acov(lag)) / var_plus;

    // Geyer pair sums: include the first pair, truncate at the first
    // non-positive pair, and force the sequence to be non-increasing.
    let mut tau_pairs = 0.0;
    let mut prev = f64::INFINITY;
    let mut k = 0usize;
    loop {
        let even = if k == 0 { 1.0 } else { rho(2 * k) };
        let odd = if 2 * k + 1 < n { rho(2 * k + 1) } else { 0.0 };
        let mut pair = even + odd;
        if k > 0 && pair <= 0.0 {
            break;
        }
        pair = pair.min(prev);
        tau_pairs += pair;
        prev = pair;
        k += 1;
        if 2 * k >= n {
            break;
        }
    }
    let tau = (2.0 * tau_pairs - 1.0).max(f64::MIN_POSITIVE);
    DiagValue {
        value: (m * n) as f64 / tau,
        degenerate: false,
    }
}
