//! Random-walk Metropolis-Hastings, for comparison against SMC.
//!
//! Chains start at the prior means. Per-dimension proposal scales come from
//! the prior standard deviations; a global step factor adapts toward the
//! target acceptance rate during the tuning phase and is frozen afterwards.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::chain::ChainDraws;
use super::stage::Target;
use crate::error::{Error, Result};
use crate::par_map;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MhConfig {
    pub n_chains: usize,
    /// Retained draws per chain, after tuning.
    pub n_draws: usize,
    /// Discarded tuning draws per chain.
    pub n_tune: usize,
    pub target_accept: f64,
    pub seed: u64,
}

impl Default for MhConfig {
    fn default() -> Self {
        MhConfig {
            n_chains: 8,
            n_draws: 1000,
            n_tune: 500,
            target_accept: 0.9,
            seed: 0,
        }
    }
}

impl MhConfig {
    pub fn with_seed(seed: u64) -> Self {
        MhConfig {
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_chains == 0 || self.n_draws == 0 {
            return Err(Error::Config(
                "metropolis-hastings needs at least one chain and one draw".into(),
            ));
        }
        if !(self.target_accept > 0.0 && self.target_accept < 1.0) {
            return Err(Error::Config(format!(
                "target_accept must be in (0, 1), got {}",
                self.target_accept
            )));
        }
        Ok(())
    }
}

/// Run independent random-walk chains against a target.
pub fn mh_sample<T: Target + ?Sized>(target: &T, config: &MhConfig) -> Result<Vec<ChainDraws>> {
    config.validate()?;
    let ids: Vec<usize> = (0..config.n_chains).collect();
    par_map(ids, |chain_id| run_chain(target, config, chain_id))
        .into_iter()
        .collect()
}

fn run_chain<T: Target + ?Sized>(
    target: &T,
    config: &MhConfig,
    chain_id: usize,
) -> Result<ChainDraws> {
    let chain_seed = config.seed.wrapping_add(chain_id as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(chain_seed);
    let priors = target.priors();
    let names: Vec<String> = priors
        .sampled_names()
        .into_iter()
        .map(str::to_string)
        .collect();
    let d = names.len();

    let scales = priors.sampled_sd_hints();
    let mut theta = priors.sampled_means();
    let mut log_prior = priors.log_prior(&theta)?;
    let mut log_lik = target.log_likelihood(&theta);
    if log_prior == f64::NEG_INFINITY {
        return Err(Error::Config(
            "prior mean outside the prior support; cannot start the chain".into(),
        ));
    }

    // Global log step factor, adapted by stochastic approximation.
    let mut log_step = (0.1f64).ln();
    let mut draws = Vec::with_capacity(config.n_draws);
    let mut lls = Vec::with_capacity(config.n_draws);
    let mut sample_accepts = 0usize;

    for iter in 0..(config.n_tune + config.n_draws) {
        let step = log_step.exp();
        let mut candidate = theta.clone();
        for k in 0..d {
            let z: f64 = StandardNormal.sample(&mut rng);
            candidate[k] += step * scales[k] * z;
        }
        let cand_prior = priors.log_prior(&candidate)?;
        let accept_draw: f64 = rng.gen();

        let mut alpha = 0.0;
        let mut cand_lik = f64::NEG_INFINITY;
        if cand_prior > f64::NEG_INFINITY {
            cand_lik = target.log_likelihood(&candidate);
            let delta = (cand_lik + cand_prior) - (log_lik + log_prior);
            alpha = if delta >= 0.0 { 1.0 } else { delta.exp() };
        }
        let accepted = accept_draw < alpha;
        if accepted {
            theta = candidate;
            log_prior = cand_prior;
            log_lik = cand_lik;
        }

        if iter < config.n_tune {
            // Robbins-Monro on the log step size toward the target rate.
            let gamma = 1.0 / (1.0 + iter as f64).powf(0.6);
            log_step += gamma * (alpha - config.target_accept);
        } else {
            draws.push(theta.clone());
            lls.push(log_lik);
            if accepted {
                sample_accepts += 1;
            }
        }
    }

    debug_assert!(log_step.exp() > 0.0 && log_step.is_finite());
    let chain = ChainDraws {
        chain_id,
        seed: chain_seed,
        names,
        draws,
        log_likelihood: lls,
        phi_history: vec![0.0, 1.0],
        acceptance_rates: vec![sample_accepts as f64 / config.n_draws as f64],
        n_steps_history: Vec::new(),
        extra: BTreeMap::from([(
            "adapted_step".to_string(),
            format!("{}", log_step.exp()),
        )]),
    };
    chain.validate()?;
    Ok(chain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::chain::pooled_column;
    use crate::inference::prior::{Prior, PriorSet};
    use crate::inference::stage::GaussianMeanTarget;
    use crate::math;
    use indexmap::IndexMap;

    fn conjugate_target(seed: u64) -> (GaussianMeanTarget, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<f64> = (0..100)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                1.0 + z
            })
            .collect();
        let data_mean = math::mean(&data);
        let mut entries = IndexMap::new();
        entries.insert("mu".to_string(), Prior::Uniform { lo: -10.0, hi: 10.0 });
        (
            GaussianMeanTarget::new(PriorSet::new(entries).unwrap(), data, 1.0).unwrap(),
            data_mean,
        )
    }

    #[test]
    fn conjugate_posterior_matches_closed_form() {
        let (target, data_mean) = conjugate_target(1234);
        let config = MhConfig {
            n_chains: 4,
            n_draws: 4000,
            seed: 55,
            ..Default::default()
        };
        let chains = mh_sample(&target, &config).unwrap();
        let pooled = pooled_column(&chains, "mu").unwrap();
        let mean = math::mean(&pooled);
        let sd = math::std_dev(&pooled);
        assert!((mean - 1.0).abs() < 0.3, "posterior mean {mean}");
        assert!((mean - data_mean).abs() < 0.03, "mean {mean} vs oracle {data_mean}");
        assert!((0.08..=0.12).contains(&sd), "posterior sd {sd}");
    }

    #[test]
    fn tuned_acceptance_lands_near_the_target() {
        let (target, _) = conjugate_target(77);
        let config = MhConfig {
            n_chains: 2,
            n_draws: 2000,
            seed: 9,
            ..Default::default()
        };
        let chains = mh_sample(&target, &config).unwrap();
        for chain in &chains {
            let acc = chain.acceptance_rates[0];
            assert!(
                (0.7..=0.95).contains(&acc),
                "acceptance {acc} outside [0.7, 0.95]"
            );
            let step: f64 = chain.extra["adapted_step"].parse().unwrap();
            assert!(step > 0.0);
        }
    }

    #[test]
    fn chains_are_deterministic_given_the_seed() {
        let (target, _) = conjugate_target(31);
        let config = MhConfig {
            n_chains: 2,
            n_draws: 500,
            seed: 13,
            ..Default::default()
        };
        let a = mh_sample(&target, &config).unwrap();
        let b = mh_sample(&target, &config).unwrap();
        assert_eq!(a, b);
    }

    /// Long-run histogram against a two-component Gaussian mixture.
    #[test]
    fn mixture_target_total_variation() {
        struct Mixture {
            priors: PriorSet,
        }
        impl Target for Mixture {
            fn priors(&self) -> &PriorSet {
                &self.priors
            }
            fn log_likelihood(&self, theta: &[f64]) -> f64 {
                let x = theta[0];
                let comp = |m: f64, s: f64| -0.5 * ((x - m) / s).powi(2) - s.ln();
                let a = comp(-1.5, 0.5);
                let b = comp(1.5, 0.5);
                // log(0.5 e^a + 0.5 e^b), stable form.
                let hi = a.max(b);
                hi + (0.5 * (a - hi).exp() + 0.5 * (b - hi).exp()).ln()
            }
        }
        let mut entries = IndexMap::new();
        entries.insert("x".to_string(), Prior::Uniform { lo: -8.0, hi: 8.0 });
        let target = Mixture {
            priors: PriorSet::new(entries).unwrap(),
        };
        // Lower acceptance target gives a usable step size for mode hopping.
        let config = MhConfig {
            n_chains: 1,
            n_draws: 100_000,
            n_tune: 2000,
            target_accept: 0.5,
            seed: 271,
        };
        let chains = mh_sample(&target, &config).unwrap();
        let samples = chains[0].column("x").unwrap();

        // Total variation against the target density on a uniform binning.
        let bins = 80;
        let (lo, hi) = (-4.0, 4.0);
        let width = (hi - lo) / bins as f64;
        let mut hist = vec![0.0; bins];
        let mut kept = 0.0;
        for &x in &samples {
            if x >= lo && x < hi {
                hist[((x - lo) / width) as usize] += 1.0;
                kept += 1.0;
            }
        }
        let density = |x: f64| {
            let g = |m: f64, s: f64| {
                (-0.5 * ((x - m) / s).powi(2)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt())
            };
            0.5 * g(-1.5, 0.5) + 0.5 * g(1.5, 0.5)
        };
        let mut tv = 0.0;
        for (i, h) in hist.iter().enumerate() {
            let center = lo + (i as f64 + 0.5) * width;
            tv += 0.5 * (h / kept - density(center) * width).abs();
        }
        assert!(tv < 0.05, "total variation {tv}");
    }
}
