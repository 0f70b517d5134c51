//! Bayesian calibration: priors, likelihood, samplers and the staged
//! calibration pipeline.

pub mod chain;
pub mod mh;
pub mod pipeline;
pub mod prior;
pub mod smc;
pub mod stage;

pub use chain::{pooled_column, pooled_mean, ChainDraws};
pub use mh::{mh_sample, MhConfig};
pub use pipeline::{run_stage_pipeline, FixFrom, SamplerConfig, SamplerKind, StagePlan, StageResult};
pub use prior::{Prior, PriorSet};
pub use smc::{smc_sample, SmcConfig};
pub use stage::{CalibrationStage, ChannelSpec, GaussianMeanTarget, Target};
