//! Split-R-hat convergence diagnostic on rank-normalized draws.

use super::rank::{rank_normalize, split_chains};
use super::DiagValue;
use crate::error::{Error, Result};
use crate::math;

pub(super) fn validate_chains(chains: &[Vec<f64>]) -> Result<()> {
    if chains.len() < 2 {
        return Err(Error::NotEnoughSamples {
            got: chains.len(),
            required: 2,
        });
    }
    let n = chains[0].len();
    if n < 4 {
        return Err(Error::NotEnoughSamples {
            got: n,
            required: 4,
        });
    }
    if chains.iter().any(|c| c.len() != n) {
        return Err(Error::LengthMismatch {
            left: n,
            right: chains.iter().map(Vec::len).find(|&l| l != n).unwrap(),
        });
    }
    Ok(())
}

pub(super) fn is_degenerate(chains: &[Vec<f64>]) -> bool {
    let first = chains[0][0];
    chains
        .iter()
        .all(|chain| chain.iter().all(|&v| v == first))
}

/// Split-R-hat: between/within variance ratio over rank-normalized
/// half-chains. Values near 1 indicate mixing.
pub fn split_rhat(chains: &[Vec<f64>]) -> Result<DiagValue> {
    validate_chains(chains)?;
    if is_degenerate(chains) {
        return Ok(DiagValue {
            value: 1.0,
            degenerate: true,
        });
    }
    let halves = rank_normalize(&split_chains(chains));
    let n = halves[0].len() as f64;
    let means: Vec<f64> = halves.iter().map(|c| math::mean(c)).collect();
    let within = math::mean(&halves.iter().map(|c| math::variance(c)).collect::<Vec<_>>());
    let between_over_n = math::variance(&means);
    let var_hat = within * (n - 1.0) / n + between_over_n;
    Ok(DiagValue {
        value: (var_hat / within).sqrt(),
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    pub(crate) fn normal_chains(
        n_chains: usize,
        n_draws: usize,
        seed: u64,
        offset: impl Fn(usize) -> f64,
    ) -> Vec<Vec<f64>> {
        (0..n_chains)
            .map(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed + c as u64);
                (0..n_draws)
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        z + offset(c)
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn iid_chains_are_near_one() {
        let chains = normal_chains(8, 1000, 42, |_| 0.0);
        let rhat = split_rhat(&chains).unwrap();
        assert!(!rhat.degenerate);
        assert!(
            (0.999..=1.01).contains(&rhat.value),
            "rhat {} outside [0.999, 1.01]",
            rhat.value
        );
    }

    #[test]
    fn offset_chain_is_flagged_large() {
        let chains = normal_chains(8, 1000, 7, |c| if c == 0 { 10.0 } else { 0.0 });
        let rhat = split_rhat(&chains).unwrap();
        assert!(rhat.value > 2.0, "rhat {} should exceed 2", rhat.value);
    }

    #[test]
    fn constant_chains_are_degenerate() {
        let chains = vec![vec![3.0; 100], vec![3.0; 100]];
        let rhat = split_rhat(&chains).unwrap();
        assert!(rhat.degenerate);
        assert_eq!(rhat.value, 1.0);
    }

    #[test]
    fn too_few_chains_is_an_error() {
        assert!(split_rhat(&[vec![1.0, 2.0, 3.0, 4.0]]).is_err());
    }
}
