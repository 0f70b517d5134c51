//! Staged calibration: run stages in order, feeding posterior means of
//! earlier stages into the fixed parameters of later ones.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::chain::{pooled_mean, ChainDraws};
use super::mh::{mh_sample, MhConfig};
use super::smc::{smc_sample, SmcConfig};
use super::stage::CalibrationStage;
use crate::diagnostics::{diagnostics_report, DiagnosticsReport};
use crate::error::{Error, Result};

/// Fix one vehicle parameter from an earlier stage's pooled posterior mean.
///
/// `source` names the sampled parameter in the upstream stage (defaults to
/// `param`); `scale` multiplies the mean, which expresses ties such as a
/// per-axle share of a vehicle-level coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixFrom {
    pub param: String,
    pub stage: String,
    #[serde(default)]
    pub source: Option<String>,
    #[serde(default = "default_scale")]
    pub scale: f64,
}

fn default_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone)]
pub struct StagePlan {
    pub stage: CalibrationStage,
    pub fix_from: Vec<FixFrom>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    Smc,
    Mh,
}

#[derive(Debug, Clone)]
pub enum SamplerConfig {
    Smc(SmcConfig),
    Mh(MhConfig),
}

impl SamplerConfig {
    pub fn sample(&self, stage: &CalibrationStage) -> Result<Vec<ChainDraws>> {
        match self {
            SamplerConfig::Smc(config) => smc_sample(stage, config),
            SamplerConfig::Mh(config) => mh_sample(stage, config),
        }
    }
}

#[derive(Debug, Clone)]
pub struct StageResult {
    pub name: String,
    pub chains: Vec<ChainDraws>,
    pub report: DiagnosticsReport,
}

/// Run the staged pipeline. When `out_dir` is given, chains, summaries and
/// diagnostics reports are persisted under one directory per stage.
pub fn run_stage_pipeline(
    plans: Vec<StagePlan>,
    sampler: &SamplerConfig,
    out_dir: Option<&Path>,
) -> Result<Vec<StageResult>> {
    let mut results: Vec<StageResult> = Vec::with_capacity(plans.len());

    for plan in plans {
        let mut stage = plan.stage;
        for fix in &plan.fix_from {
            let upstream = results
                .iter()
                .find(|r| r.name == fix.stage)
                .ok_or_else(|| Error::MissingUpstream {
                    stage: fix.stage.clone(),
                    param: fix.param.clone(),
                })?;
            let source = fix.source.as_deref().unwrap_or(&fix.param);
            let value = fix.scale * pooled_mean(&upstream.chains, source)?;
            let field = stage
                .base
                .field_mut(&fix.param)
                .ok_or_else(|| Error::UnknownParam(fix.param.clone()))?;
            *field = value;
            log::info!(
                "stage '{}': fixed {} = {value:.6} from stage '{}' ({source})",
                stage.name,
                fix.param,
                fix.stage
            );
        }
        stage.validate()?;

        let mut chains = sampler.sample(&stage)?;
        for chain in &mut chains {
            chain
                .extra
                .insert("stage".to_string(), stage.name.clone());
        }
        let report = diagnostics_report(&chains)?;

        if let Some(dir) = out_dir {
            let stage_dir = dir.join(&stage.name);
            fs::create_dir_all(&stage_dir).map_err(|source| Error::Io {
                path: stage_dir.clone(),
                source,
            })?;
            for chain in &chains {
                chain.write_csv(stage_dir.join(format!("chain_{}.csv", chain.chain_id)))?;
            }
            let summary_path = stage_dir.join("summary.json");
            let file = fs::File::create(&summary_path).map_err(|source| Error::Io {
                path: summary_path.clone(),
                source,
            })?;
            serde_json::to_writer_pretty(std::io::BufWriter::new(file), &report)
                .map_err(|e| Error::ChainFile(format!("{}: {e}", summary_path.display())))?;
        }

        results.push(StageResult {
            name: stage.name.clone(),
            chains,
            report,
        });
    }

    Ok(results)
}
