//! Monte Carlo standard errors of the posterior mean and sd.

use super::ess::ess_bulk;
use super::DiagValue;
use crate::error::Result;
use crate::math;

/// MCSE of the mean (sd / sqrt(bulk ESS)) and of the sd (delta-method
/// estimate on the variance, using the same effective sample size).
pub fn mcse(chains: &[Vec<f64>]) -> Result<(DiagValue, DiagValue)> {
    let ess = ess_bulk(chains)?;
    if ess.degenerate {
        let zero = DiagValue {
            value: 0.0,
            degenerate: true,
        };
        return Ok((zero, zero));
    }
    let pooled: Vec<f64> = chains.iter().flatten().copied().collect();
    let mean = math::mean(&pooled);
    let sd = math::std_dev(&pooled);
    let mcse_mean = sd / ess.value.sqrt();

    let m4 = pooled
        .iter()
        .map(|&x| {
            let d = x - mean;
            d * d * d * d
        })
        .sum::<f64>()
        / pooled.len() as f64;
    let var_of_var = (m4 - sd.powi(4)).max(0.0) / ess.value;
    let mcse_sd = var_of_var.sqrt() / (2.0 * sd);

    Ok((
        DiagValue {
            value: mcse_mean,
            degenerate: false,
        },
        DiagValue {
            value: mcse_sd,
            degenerate: false,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn iid_chains(scale: f64, seed: u64) -> Vec<Vec<f64>> {
        (0..8)
            .map(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed + c as u64);
                (0..1000)
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        scale * z
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn iid_standard_normal_matches_one_over_sqrt_n() {
        let (mean_err, _) = mcse(&iid_chains(1.0, 17)).unwrap();
        let expected = 1.0 / 8000f64.sqrt();
        assert!(
            (mean_err.value - expected).abs() <= 0.2 * expected,
            "mcse_mean {} vs {expected} +/- 20%",
            mean_err.value
        );
    }

    #[test]
    fn scaling_draws_scales_the_errors() {
        let (m1, s1) = mcse(&iid_chains(1.0, 23)).unwrap();
        let (m10, s10) = mcse(&iid_chains(10.0, 23)).unwrap();
        assert!((m10.value / m1.value - 10.0).abs() < 1e-9);
        assert!((s10.value / s1.value - 10.0).abs() < 1e-9);
    }

    #[test]
    fn constant_chains_give_zero_with_flag() {
        let chains = vec![vec![2.0; 100], vec![2.0; 100]];
        let (mean_err, sd_err) = mcse(&chains).unwrap();
        assert!(mean_err.degenerate && sd_err.degenerate);
        assert_eq!(mean_err.value, 0.0);
        assert_eq!(sd_err.value, 0.0);
    }
}
