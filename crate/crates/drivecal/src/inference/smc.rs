//! Sequential Monte Carlo with adaptive likelihood tempering.
//!
//! Particles start at the prior (phi = 0) and move through tempered targets
//! prior * likelihood^phi until phi = 1. Each stage reweights the particles
//! by likelihood^dphi with dphi chosen so the relative effective sample size
//! of the weights stays at a configured fraction, resamples systematically,
//! fits a full-covariance Gaussian to the cloud, and mutates every particle
//! with independent-proposal Metropolis-Hastings steps; the step count
//! adapts to the previous stage's acceptance rate.
//!
//! Chains run independently and are bit-reproducible for a given config:
//! every random stream derives from the chain seed, a stage counter and a
//! particle index, so results do not depend on the parallel schedule.

use std::collections::BTreeMap;

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::chain::ChainDraws;
use super::stage::Target;
use crate::error::{Error, Result};
use crate::par_map;

/// Stream id reserved for chain-level draws (resampling).
const CHAIN_STREAM: u64 = u32::MAX as u64;
/// Jitter added to degenerate covariance diagonals.
const COV_JITTER: f64 = 1e-10;
/// Smallest admissible tempering increment.
const MIN_DPHI: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmcConfig {
    pub n_chains: usize,
    /// Particles per chain; also the number of retained draws.
    pub n_draws: usize,
    /// Acceptance probability the samplers are tuned toward (also used by
    /// the random-walk sampler).
    pub target_accept: f64,
    /// Relative ESS level that sets each tempering increment.
    pub ess_fraction: f64,
    pub seed: u64,
    /// Probability that a particle moves at least once per mutation round;
    /// sets the step count from the observed acceptance rate.
    pub move_prob: f64,
    pub max_mutation_steps: usize,
    pub init_mutation_steps: usize,
}

impl Default for SmcConfig {
    fn default() -> Self {
        SmcConfig {
            n_chains: 8,
            n_draws: 1000,
            target_accept: 0.9,
            ess_fraction: 0.5,
            seed: 0,
            move_prob: 0.99,
            max_mutation_steps: 25,
            init_mutation_steps: 5,
        }
    }
}

impl SmcConfig {
    pub fn with_seed(seed: u64) -> Self {
        SmcConfig {
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_chains == 0 || self.n_draws < 2 {
            return Err(Error::Config(
                "smc needs at least one chain and two draws".into(),
            ));
        }
        if !(self.ess_fraction > 0.0 && self.ess_fraction <= 1.0) {
            return Err(Error::Config(format!(
                "ess_fraction must be in (0, 1], got {}",
                self.ess_fraction
            )));
        }
        if !(self.move_prob > 0.0 && self.move_prob < 1.0) {
            return Err(Error::Config(format!(
                "move_prob must be in (0, 1), got {}",
                self.move_prob
            )));
        }
        if self.max_mutation_steps < 2 || self.init_mutation_steps < 1 {
            return Err(Error::Config("mutation step limits are too small".into()));
        }
        Ok(())
    }
}

/// Run independent SMC chains against a target.
pub fn smc_sample<T: Target + ?Sized>(target: &T, config: &SmcConfig) -> Result<Vec<ChainDraws>> {
    config.validate()?;
    let ids: Vec<usize> = (0..config.n_chains).collect();
    par_map(ids, |chain_id| run_chain(target, config, chain_id))
        .into_iter()
        .collect()
}

/// Deterministic per-(chain, stage, particle) generator.
fn stream_rng(chain_seed: u64, stage: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(chain_seed);
    rng.set_stream((stage << 32) | stream);
    rng
}

fn run_chain<T: Target + ?Sized>(
    target: &T,
    config: &SmcConfig,
    chain_id: usize,
) -> Result<ChainDraws> {
    let n = config.n_draws;
    let chain_seed = config.seed.wrapping_add(chain_id as u64);
    let priors = target.priors();
    let names: Vec<String> = priors
        .sampled_names()
        .into_iter()
        .map(str::to_string)
        .collect();

    let mut particles: Vec<Vec<f64>> = (0..n)
        .map(|i| priors.sample(&mut stream_rng(chain_seed, 0, i as u64)))
        .collect();
    let mut logliks: Vec<f64> = particles
        .iter()
        .map(|p| target.log_likelihood(p))
        .collect();
    let mut logpriors: Vec<f64> = particles
        .iter()
        .map(|p| priors.log_prior(p))
        .collect::<Result<_>>()?;
    if logliks.iter().all(|l| *l == f64::NEG_INFINITY) {
        return Err(Error::AllParticlesDiverged);
    }

    let mut phi = 0.0;
    let mut phi_history = vec![0.0];
    let mut acceptance_rates = Vec::new();
    let mut n_steps_history = Vec::new();
    let mut n_steps = config.init_mutation_steps;
    let mut stage: u64 = 1;

    while phi < 1.0 {
        let dphi = choose_dphi(&logliks, 1.0 - phi, config.ess_fraction * n as f64);
        let new_phi = if phi + dphi >= 1.0 { 1.0 } else { phi + dphi };
        let weights = normalized_weights(&logliks, new_phi - phi)?;

        // Resample, then refresh the proposal from the resampled cloud.
        let u: f64 = stream_rng(chain_seed, stage, CHAIN_STREAM).gen();
        let picked = systematic_resample(&weights, n, u);
        particles = picked.iter().map(|&j| particles[j].clone()).collect();
        logliks = picked.iter().map(|&j| logliks[j]).collect();
        logpriors = picked.iter().map(|&j| logpriors[j]).collect();

        let proposal = GaussianProposal::fit(&particles);

        // Independent-proposal MH mutation, one stream per particle.
        let mut accepts = 0usize;
        for i in 0..n {
            let mut rng = stream_rng(chain_seed, stage, i as u64);
            for _ in 0..n_steps {
                let candidate = proposal.sample(&mut rng);
                let lp_cand = priors.log_prior(&candidate)?;
                let accept_draw: f64 = rng.gen();
                if lp_cand == f64::NEG_INFINITY {
                    continue;
                }
                let ll_cand = target.log_likelihood(&candidate);
                let log_num = new_phi * ll_cand + lp_cand + proposal.log_density(&particles[i]);
                let log_den =
                    new_phi * logliks[i] + logpriors[i] + proposal.log_density(&candidate);
                let accept = if log_num == f64::NEG_INFINITY {
                    false
                } else if log_den == f64::NEG_INFINITY {
                    true
                } else {
                    accept_draw.ln() < log_num - log_den
                };
                if accept {
                    particles[i] = candidate;
                    logliks[i] = ll_cand;
                    logpriors[i] = lp_cand;
                    accepts += 1;
                }
            }
        }
        let p_acc = accepts as f64 / (n * n_steps) as f64;
        acceptance_rates.push(p_acc);
        n_steps_history.push(n_steps);
        n_steps = next_step_count(p_acc, config);

        phi = new_phi;
        phi_history.push(phi);
        stage += 1;
    }

    let chain = ChainDraws {
        chain_id,
        seed: chain_seed,
        names,
        draws: particles,
        log_likelihood: logliks,
        phi_history,
        acceptance_rates,
        n_steps_history,
        extra: BTreeMap::new(),
    };
    chain.validate()?;
    Ok(chain)
}

/// Number of mutation steps so a particle moves with probability
/// `move_prob`, given the observed per-step acceptance rate.
fn next_step_count(p_acc: f64, config: &SmcConfig) -> usize {
    if p_acc <= 0.0 {
        return config.max_mutation_steps;
    }
    if p_acc >= 1.0 {
        return 2;
    }
    let raw = ((1.0 - config.move_prob).ln() / (1.0 - p_acc).ln()).ceil();
    (raw as usize).clamp(2, config.max_mutation_steps)
}

/// Bisect the tempering increment so the weight ESS hits `target_ess`,
/// clamping at the remaining distance to phi = 1.
fn choose_dphi(logliks: &[f64], max_dphi: f64, target_ess: f64) -> f64 {
    let ess_at = |dphi: f64| weight_ess(logliks, dphi);
    if ess_at(max_dphi) >= target_ess {
        return max_dphi;
    }
    let (mut lo, mut hi) = (0.0, max_dphi);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if ess_at(mid) >= target_ess {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).max(MIN_DPHI)
}

/// ESS (1 / sum of squared normalized weights) of the importance weights
/// w_i proportional to exp(dphi * loglik_i).
fn weight_ess(logliks: &[f64], dphi: f64) -> f64 {
    match normalized_weights(logliks, dphi) {
        Ok(weights) => 1.0 / weights.iter().map(|w| w * w).sum::<f64>(),
        Err(_) => 0.0,
    }
}

/// Self-normalized importance weights for one tempering increment.
pub fn normalized_weights(logliks: &[f64], dphi: f64) -> Result<Vec<f64>> {
    let max = logliks
        .iter()
        .copied()
        .filter(|l| l.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::AllParticlesDiverged);
    }
    let mut weights: Vec<f64> = logliks
        .iter()
        .map(|&l| {
            if l == f64::NEG_INFINITY {
                0.0
            } else {
                (dphi * (l - max)).exp()
            }
        })
        .collect();
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::AllParticlesDiverged);
    }
    for w in &mut weights {
        *w /= total;
    }
    Ok(weights)
}

/// Systematic resampling: expected copy counts equal n * w_i.
///
/// `u0` is a single uniform draw in [0, 1).
pub fn systematic_resample(weights: &[f64], n_out: usize, u0: f64) -> Vec<usize> {
    debug_assert!((0.0..1.0).contains(&u0));
    let mut picked = Vec::with_capacity(n_out);
    let mut cumulative = weights[0];
    let mut j = 0usize;
    for k in 0..n_out {
        let position = (k as f64 + u0) / n_out as f64;
        while cumulative < position && j + 1 < weights.len() {
            j += 1;
            cumulative += weights[j];
        }
        picked.push(j);
    }
    picked
}

/// Multivariate Gaussian fitted to a particle cloud, used both as the
/// independence proposal and for its log-density.
pub struct GaussianProposal {
    mean: DVector<f64>,
    /// Lower-triangular Cholesky factor of the covariance.
    l: DMatrix<f64>,
    log_norm: f64,
}

impl GaussianProposal {
    pub fn fit(particles: &[Vec<f64>]) -> GaussianProposal {
        let n = particles.len();
        let d = particles[0].len();
        let mut mean = DVector::zeros(d);
        for p in particles {
            for k in 0..d {
                mean[k] += p[k];
            }
        }
        mean /= n as f64;

        let mut cov = DMatrix::zeros(d, d);
        for p in particles {
            for r in 0..d {
                let dr = p[r] - mean[r];
                for c in r..d {
                    cov[(r, c)] += dr * (p[c] - mean[c]);
                }
            }
        }
        cov /= (n - 1).max(1) as f64;
        for r in 0..d {
            for c in 0..r {
                cov[(r, c)] = cov[(c, r)];
            }
        }

        let chol = Cholesky::new(cov.clone()).unwrap_or_else(|| {
            // Degenerate cloud: fall back to a jittered diagonal.
            let mut diag = DMatrix::zeros(d, d);
            for k in 0..d {
                diag[(k, k)] = cov[(k, k)].max(0.0) + COV_JITTER;
            }
            Cholesky::new(diag).expect("jittered diagonal is positive definite")
        });
        let l: DMatrix<f64> = chol.l();
        let log_det: f64 = (0..d).map(|k| l[(k, k)].ln()).sum();
        let log_norm = -0.5 * d as f64 * (2.0 * std::f64::consts::PI).ln() - log_det;
        GaussianProposal { mean, l, log_norm }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Vec<f64> {
        let d = self.mean.len();
        let z = DVector::from_iterator(d, (0..d).map(|_| StandardNormal.sample(rng)));
        let x = &self.mean + &self.l * z;
        x.iter().copied().collect()
    }

    pub fn log_density(&self, x: &[f64]) -> f64 {
        let diff = DVector::from_row_slice(x) - &self.mean;
        let y = self
            .l
            .solve_lower_triangular(&diff)
            .expect("cholesky factor is invertible");
        self.log_norm - 0.5 * y.norm_squared()
    }
}
