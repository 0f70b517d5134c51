//! Prior distributions over named parameters.

use indexmap::IndexMap;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;

const LN_2PI: f64 = 1.8378770664093453;

/// Prior for one named parameter.
///
/// `Tied` parameters are deterministic multiples of a sampled group
/// variable and contribute nothing to the prior density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prior {
    Uniform { lo: f64, hi: f64 },
    HalfNormal { scale: f64 },
    Fixed { value: f64 },
    Tied { group: String, weight: f64 },
}

impl Prior {
    /// Whether this entry is a sampled coordinate of the parameter vector.
    pub fn is_sampled(&self) -> bool {
        matches!(self, Prior::Uniform { .. } | Prior::HalfNormal { .. })
    }

    pub fn log_density(&self, x: f64) -> f64 {
        match *self {
            Prior::Uniform { lo, hi } => {
                if x >= lo && x <= hi {
                    -(hi - lo).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            Prior::HalfNormal { scale } => {
                if x >= 0.0 {
                    2f64.ln() - 0.5 * LN_2PI - scale.ln() - 0.5 * (x / scale) * (x / scale)
                } else {
                    f64::NEG_INFINITY
                }
            }
            Prior::Fixed { .. } | Prior::Tied { .. } => 0.0,
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        match *self {
            Prior::Uniform { lo, hi } => rng.gen_range(lo..hi),
            Prior::HalfNormal { scale } => {
                let z: f64 = StandardNormal.sample(rng);
                scale * z.abs()
            }
            Prior::Fixed { value } => value,
            Prior::Tied { .. } => f64::NAN,
        }
    }

    /// CDF of a sampled prior (used by distribution tests).
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Prior::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Prior::HalfNormal { scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    2.0 * math::norm_cdf(x / scale) - 1.0
                }
            }
            Prior::Fixed { value } => {
                if x >= value {
                    1.0
                } else {
                    0.0
                }
            }
            Prior::Tied { .. } => f64::NAN,
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Prior::Uniform { lo, hi } => 0.5 * (lo + hi),
            Prior::HalfNormal { scale } => scale * (2.0 / std::f64::consts::PI).sqrt(),
            Prior::Fixed { value } => value,
            Prior::Tied { .. } => f64::NAN,
        }
    }

    /// Standard deviation, used to scale random-walk proposals.
    pub fn sd_hint(&self) -> f64 {
        match *self {
            Prior::Uniform { lo, hi } => (hi - lo) / 12f64.sqrt(),
            Prior::HalfNormal { scale } => scale * (1.0 - 2.0 / std::f64::consts::PI).sqrt(),
            Prior::Fixed { .. } | Prior::Tied { .. } => 0.0,
        }
    }
}

/// Ordered set of named priors: the sampled entries define the parameter
/// vector, in insertion order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PriorSet {
    entries: IndexMap<String, Prior>,
}

impl PriorSet {
    pub fn new(entries: IndexMap<String, Prior>) -> Result<Self> {
        let set = PriorSet { entries };
        set.validate()?;
        Ok(set)
    }

    fn validate(&self) -> Result<()> {
        for (name, prior) in &self.entries {
            let invalid = |message: String| Error::InvalidPrior {
                name: name.clone(),
                message,
            };
            match prior {
                Prior::Uniform { lo, hi } => {
                    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                        return Err(invalid(format!("uniform bounds [{lo}, {hi}]")));
                    }
                }
                Prior::HalfNormal { scale } => {
                    if !(scale > &0.0) || !scale.is_finite() {
                        return Err(invalid(format!("half-normal scale {scale}")));
                    }
                }
                Prior::Fixed { value } => {
                    if !value.is_finite() {
                        return Err(invalid(format!("fixed value {value}")));
                    }
                }
                Prior::Tied { group, weight } => {
                    if !weight.is_finite() {
                        return Err(invalid(format!("tie weight {weight}")));
                    }
                    match self.entries.get(group) {
                        Some(target) if target.is_sampled() => {}
                        Some(_) => {
                            return Err(invalid(format!(
                                "tie group '{group}' is not a sampled parameter"
                            )))
                        }
                        None => {
                            return Err(invalid(format!("tie group '{group}' does not exist")))
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn entries(&self) -> &IndexMap<String, Prior> {
        &self.entries
    }

    pub fn get(&self, name: &str) -> Option<&Prior> {
        self.entries.get(name)
    }

    /// Names of the sampled coordinates, in order.
    pub fn sampled_names(&self) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|(_, p)| p.is_sampled())
            .map(|(n, _)| n.as_str())
            .collect()
    }

    pub fn n_sampled(&self) -> usize {
        self.entries.values().filter(|p| p.is_sampled()).count()
    }

    fn check_len(&self, theta: &[f64]) -> Result<()> {
        let expected = self.n_sampled();
        if theta.len() != expected {
            return Err(Error::ParamCountMismatch {
                got: theta.len(),
                expected,
                names: self.sampled_names().join(", "),
            });
        }
        Ok(())
    }

    /// Sum of the log prior densities of the sampled coordinates.
    ///
    /// Returns negative infinity outside the joint support.
    pub fn log_prior(&self, theta: &[f64]) -> Result<f64> {
        self.check_len(theta)?;
        let mut total = 0.0;
        let mut values = theta.iter();
        for prior in self.entries.values() {
            if prior.is_sampled() {
                total += prior.log_density(*values.next().unwrap());
            }
        }
        Ok(total)
    }

    /// Draw a parameter vector from the joint prior.
    pub fn sample(&self, rng: &mut impl Rng) -> Vec<f64> {
        self.entries
            .values()
            .filter(|p| p.is_sampled())
            .map(|p| p.sample(rng))
            .collect()
    }

    /// Prior means of the sampled coordinates (random-walk start point).
    pub fn sampled_means(&self) -> Vec<f64> {
        self.entries
            .values()
            .filter(|p| p.is_sampled())
            .map(|p| p.mean())
            .collect()
    }

    /// Proposal scales for the sampled coordinates.
    pub fn sampled_sd_hints(&self) -> Vec<f64> {
        self.entries
            .values()
            .filter(|p| p.is_sampled())
            .map(|p| p.sd_hint())
            .collect()
    }

    /// Resolve every entry to a value: sampled from `theta`, fixed from the
    /// prior, tied as weight times the group's value.
    pub fn resolve(&self, theta: &[f64]) -> Result<IndexMap<String, f64>> {
        self.check_len(theta)?;
        let mut out = IndexMap::with_capacity(self.entries.len());
        let mut values = theta.iter();
        for (name, prior) in &self.entries {
            match prior {
                Prior::Uniform { .. } | Prior::HalfNormal { .. } => {
                    out.insert(name.clone(), *values.next().unwrap());
                }
                Prior::Fixed { value } => {
                    out.insert(name.clone(), *value);
                }
                Prior::Tied { .. } => {
                    out.insert(name.clone(), f64::NAN);
                }
            }
        }
        // Second pass for ties, so groups may appear in any order.
        for (name, prior) in &self.entries {
            if let Prior::Tied { group, weight } = prior {
                let base = *out.get(group).ok_or_else(|| Error::UnknownParam(group.clone()))?;
                out.insert(name.clone(), weight * base);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn example_set() -> PriorSet {
        let mut entries = IndexMap::new();
        entries.insert(
            "c_xf".to_string(),
            Prior::Uniform {
                lo: 1000.0,
                hi: 50_000.0,
            },
        );
        entries.insert("sigma_u".to_string(), Prior::HalfNormal { scale: 0.1 });
        entries.insert("g".to_string(), Prior::Fixed { value: 9.81 });
        entries.insert(
            "b_phi".to_string(),
            Prior::Uniform {
                lo: 200.0,
                hi: 60_000.0,
            },
        );
        entries.insert(
            "b_phi_f".to_string(),
            Prior::Tied {
                group: "b_phi".to_string(),
                weight: 0.5,
            },
        );
        PriorSet::new(entries).unwrap()
    }

    #[test]
    fn flat_log_prior_inside_support() {
        let mut entries = IndexMap::new();
        entries.insert("a".to_string(), Prior::Uniform { lo: 0.0, hi: 2.0 });
        entries.insert("b".to_string(), Prior::Uniform { lo: -1.0, hi: 3.0 });
        let set = PriorSet::new(entries).unwrap();
        let lp = set.log_prior(&[1.0, 0.0]).unwrap();
        assert_relative_eq!(lp, -(2.0f64.ln()) - 4.0f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn outside_support_is_neg_infinity() {
        let set = example_set();
        let lp = set.log_prior(&[500.0, 0.05, 1000.0]).unwrap();
        assert_eq!(lp, f64::NEG_INFINITY);
        let lp = set.log_prior(&[2000.0, -0.01, 1000.0]).unwrap();
        assert_eq!(lp, f64::NEG_INFINITY);
    }

    #[test]
    fn half_normal_density_at_zero() {
        let prior = Prior::HalfNormal { scale: 1.0 };
        assert_relative_eq!(prior.log_density(0.0), -0.22579135264472738, epsilon = 1e-12);
    }

    #[test]
    fn count_mismatch_is_an_error() {
        let set = example_set();
        let err = set.log_prior(&[1.0]).unwrap_err();
        assert!(matches!(err, Error::ParamCountMismatch { expected: 3, .. }));
    }

    #[test]
    fn resolve_applies_fixed_and_tied() {
        let set = example_set();
        let resolved = set.resolve(&[25_000.0, 0.1, 20_000.0]).unwrap();
        assert_eq!(resolved["c_xf"], 25_000.0);
        assert_eq!(resolved["g"], 9.81);
        assert_eq!(resolved["b_phi_f"], 10_000.0);
    }

    #[test]
    fn tie_must_reference_sampled_group() {
        let mut entries = IndexMap::new();
        entries.insert("x".to_string(), Prior::Fixed { value: 1.0 });
        entries.insert(
            "y".to_string(),
            Prior::Tied {
                group: "x".to_string(),
                weight: 2.0,
            },
        );
        assert!(PriorSet::new(entries).is_err());
    }

    #[test]
    fn samples_match_their_cdf() {
        let mut rng = ChaCha8Rng::seed_from_u64(3141);
        let n = 10_000;
        for prior in [
            Prior::Uniform {
                lo: -2.0,
                hi: 5.0,
            },
            Prior::HalfNormal { scale: 1.3 },
        ] {
            let samples: Vec<f64> = (0..n).map(|_| prior.sample(&mut rng)).collect();
            let d = crate::math::ks_statistic(&samples, |x| prior.cdf(x));
            assert!(d < 0.02, "KS statistic {d} for {prior:?}");
        }
    }
}
