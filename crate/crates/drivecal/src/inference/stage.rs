//! Calibration targets: priors plus a log-likelihood.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::prior::PriorSet;
use crate::data::{align, TimeSeries};
use crate::driver::ControlSchedule;
use crate::dynamics::{simulate, VehicleParams, VehicleState, STATE_CHANNELS};
use crate::error::{Error, Result};

const LN_2PI: f64 = 1.8378770664093453;

/// A sampling target: a proper prior over a parameter vector and a
/// log-likelihood. Implementations must be reentrant; samplers evaluate the
/// likelihood from several threads.
pub trait Target: Sync {
    fn priors(&self) -> &PriorSet;

    /// Log-likelihood at a sampled parameter vector.
    ///
    /// Returns negative infinity for parameter vectors whose forward
    /// evaluation fails; samplers treat that as zero likelihood.
    fn log_likelihood(&self, theta: &[f64]) -> f64;
}

/// A data channel entering the likelihood along with the name of the noise
/// parameter that scales its residuals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub name: String,
    pub sigma: String,
}

/// One stage of the calibration protocol.
///
/// The stage owns its maneuver, warm-start state, data window and priors.
/// Parameters not present in the priors keep their values from `base`.
#[derive(Debug, Clone)]
pub struct CalibrationStage {
    pub name: String,
    pub base: VehicleParams,
    pub schedule: ControlSchedule,
    pub init_state: VehicleState,
    pub t0: f64,
    pub tf: f64,
    pub dt: f64,
    pub sample_dt: f64,
    pub data: TimeSeries,
    pub channels: Vec<ChannelSpec>,
    pub priors: PriorSet,
}

impl CalibrationStage {
    /// Check internal consistency: channels exist, sigma parameters are
    /// declared, the base parameter set is valid.
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        for spec in &self.channels {
            if !STATE_CHANNELS.contains(&spec.name.as_str()) {
                return Err(Error::UnknownChannel {
                    name: spec.name.clone(),
                    available: STATE_CHANNELS.join(", "),
                });
            }
            self.data.require(&spec.name)?;
            if self.priors.get(&spec.sigma).is_none() {
                return Err(Error::Config(format!(
                    "stage '{}': sigma parameter '{}' for channel '{}' has no prior entry",
                    self.name, spec.sigma, spec.name
                )));
            }
        }
        if self.channels.is_empty() {
            return Err(Error::Config(format!(
                "stage '{}' has no likelihood channels",
                self.name
            )));
        }
        Ok(())
    }

    /// Assemble the full parameter set and per-channel noise scales for a
    /// sampled parameter vector.
    pub fn build_params(&self, theta: &[f64]) -> Result<(VehicleParams, Vec<f64>)> {
        let resolved = self.priors.resolve(theta)?;
        let mut params = self.base.clone();
        for (name, &value) in &resolved {
            if let Some(field) = params.field_mut(name) {
                *field = value;
            }
        }
        let mut sigmas = Vec::with_capacity(self.channels.len());
        for spec in &self.channels {
            let sigma = *resolved
                .get(&spec.sigma)
                .ok_or_else(|| Error::UnknownParam(spec.sigma.clone()))?;
            sigmas.push(sigma);
        }
        Ok((params, sigmas))
    }

    /// Simulate the stage maneuver at a sampled parameter vector.
    pub fn response(&self, theta: &[f64]) -> Result<TimeSeries> {
        let (params, _) = self.build_params(theta)?;
        simulate(
            &params,
            &self.schedule,
            &self.init_state,
            self.t0,
            self.tf,
            self.dt,
            self.sample_dt,
        )
    }

    pub fn channel_names(&self) -> Vec<&str> {
        self.channels.iter().map(|c| c.name.as_str()).collect()
    }
}

impl Target for CalibrationStage {
    fn priors(&self) -> &PriorSet {
        &self.priors
    }

    fn log_likelihood(&self, theta: &[f64]) -> f64 {
        let (params, sigmas) = match self.build_params(theta) {
            Ok(built) => built,
            Err(err) => {
                log::warn!("stage '{}': parameter assembly failed: {err}", self.name);
                return f64::NEG_INFINITY;
            }
        };
        if sigmas.iter().any(|&s| !(s > 0.0)) {
            return f64::NEG_INFINITY;
        }
        if params.validate().is_err() {
            return f64::NEG_INFINITY;
        }
        let model = match simulate(
            &params,
            &self.schedule,
            &self.init_state,
            self.t0,
            self.tf,
            self.dt,
            self.sample_dt,
        ) {
            Ok(series) => series,
            Err(err) => {
                log::warn!(
                    "stage '{}': simulation diverged, treating as zero likelihood: {err}",
                    self.name
                );
                return f64::NEG_INFINITY;
            }
        };
        let residuals = match align(&model, &self.data, &self.channel_names()) {
            Ok(res) => res,
            Err(err) => {
                log::warn!("stage '{}': alignment failed: {err}", self.name);
                return f64::NEG_INFINITY;
            }
        };
        gaussian_log_likelihood(&residuals.residuals, &sigmas)
    }
}

/// Independent Gaussian log-likelihood of per-channel residual vectors.
pub fn gaussian_log_likelihood(residuals: &[Vec<f64>], sigmas: &[f64]) -> f64 {
    debug_assert_eq!(residuals.len(), sigmas.len());
    let mut total = 0.0;
    for (channel, &sigma) in residuals.iter().zip(sigmas) {
        let inv_var = 1.0 / (sigma * sigma);
        let mut ss = 0.0;
        for &r in channel {
            ss += r * r;
        }
        total += -0.5 * ss * inv_var - channel.len() as f64 * (sigma.ln() + 0.5 * LN_2PI);
    }
    total
}

/// Synthetic-data description for tests and demos: a mean parameter with a
/// Gaussian likelihood of known scale around observed values.
#[derive(Debug, Clone)]
pub struct GaussianMeanTarget {
    priors: PriorSet,
    pub observations: Vec<f64>,
    pub noise_sd: f64,
}

impl GaussianMeanTarget {
    pub fn new(priors: PriorSet, observations: Vec<f64>, noise_sd: f64) -> Result<Self> {
        if priors.n_sampled() != 1 {
            return Err(Error::Config(
                "GaussianMeanTarget expects exactly one sampled parameter".into(),
            ));
        }
        Ok(GaussianMeanTarget {
            priors,
            observations,
            noise_sd,
        })
    }
}

impl Target for GaussianMeanTarget {
    fn priors(&self) -> &PriorSet {
        &self.priors
    }

    fn log_likelihood(&self, theta: &[f64]) -> f64 {
        let mu = theta[0];
        let inv_var = 1.0 / (self.noise_sd * self.noise_sd);
        self.observations
            .iter()
            .map(|&y| -0.5 * (y - mu) * (y - mu) * inv_var - self.noise_sd.ln() - 0.5 * LN_2PI)
            .sum()
    }
}

/// Map resolved parameter names to their values for reporting.
pub fn resolved_map(priors: &PriorSet, theta: &[f64]) -> Result<IndexMap<String, f64>> {
    priors.resolve(theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::maneuvers::{self, LongitudinalRamp};
    use crate::inference::prior::Prior;
    use approx::assert_relative_eq;
    use indexmap::IndexMap;

    fn tiny_stage() -> CalibrationStage {
        let params = crate::config::default_vehicle();
        let schedule = maneuvers::longitudinal_ramp(&LongitudinalRamp::default());
        let init = VehicleState::warm_start(5.0, &params);
        let data = simulate(&params, &schedule, &init, 1.0, 3.0, 5e-3, 0.01)
            .unwrap()
            .select(&["u"])
            .unwrap();
        let mut entries = IndexMap::new();
        entries.insert(
            "c_xf".to_string(),
            Prior::Uniform {
                lo: 1000.0,
                hi: 50_000.0,
            },
        );
        entries.insert("sigma_u".to_string(), Prior::Fixed { value: 1.0 });
        CalibrationStage {
            name: "test".into(),
            base: params,
            schedule,
            init_state: init,
            t0: 1.0,
            tf: 3.0,
            dt: 5e-3,
            sample_dt: 0.01,
            data,
            channels: vec![ChannelSpec {
                name: "u".into(),
                sigma: "sigma_u".into(),
            }],
            priors: PriorSet::new(entries).unwrap(),
        }
    }

    #[test]
    fn zero_residuals_give_the_normalizing_constant() {
        let stage = tiny_stage();
        stage.validate().unwrap();
        // Evaluated at the truth with sigma = 1: exactly -n/2 * ln(2pi).
        let truth = [stage.base.c_xf];
        let ll = stage.log_likelihood(&truth);
        let n = stage.data.len() as f64;
        assert_relative_eq!(ll, -0.5 * n * LN_2PI, max_relative = 1e-12);
    }

    #[test]
    fn single_residual_hand_value() {
        let ll = gaussian_log_likelihood(&[vec![2.0]], &[1.0]);
        assert_relative_eq!(ll, -2.9189385332046727, epsilon = 1e-12);
    }

    #[test]
    fn doubling_sigma_costs_n_log_two_at_zero_residuals() {
        let residuals = vec![vec![0.0; 10]];
        let base = gaussian_log_likelihood(&residuals, &[1.0]);
        let doubled = gaussian_log_likelihood(&residuals, &[2.0]);
        assert_relative_eq!(base - doubled, 10.0 * 2f64.ln(), max_relative = 1e-12);
    }

    #[test]
    fn nonpositive_sigma_is_rejected() {
        let mut stage = tiny_stage();
        let mut entries = IndexMap::new();
        entries.insert(
            "c_xf".to_string(),
            Prior::Uniform {
                lo: 1000.0,
                hi: 50_000.0,
            },
        );
        entries.insert("sigma_u".to_string(), Prior::Fixed { value: 0.0 });
        stage.priors = PriorSet::new(entries).unwrap();
        assert_eq!(stage.log_likelihood(&[25_000.0]), f64::NEG_INFINITY);
    }

    #[test]
    fn tied_parameters_resolve_into_the_vehicle() {
        let mut stage = tiny_stage();
        let mut entries = IndexMap::new();
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
        entries.insert(
            "b_phi_r".to_string(),
            Prior::Tied {
                group: "b_phi".to_string(),
                weight: 0.5,
            },
        );
        entries.insert("sigma_u".to_string(), Prior::Fixed { value: 0.1 });
        stage.priors = PriorSet::new(entries).unwrap();
        let (params, _) = stage.build_params(&[30_000.0]).unwrap();
        assert_eq!(params.b_phi_f, 15_000.0);
        assert_eq!(params.b_phi_r, 15_000.0);
    }
}
