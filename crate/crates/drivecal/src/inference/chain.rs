//! Per-chain posterior draws and their on-disk format.
//!
//! Each chain is one CSV (columns: parameter names plus `log_likelihood`,
//! one row per draw) with a JSON sidecar carrying the sampler metadata.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ChainDraws {
    pub chain_id: usize,
    pub seed: u64,
    pub names: Vec<String>,
    /// Row-major draw matrix, `n_draws x n_params`.
    pub draws: Vec<Vec<f64>>,
    pub log_likelihood: Vec<f64>,
    /// Tempering exponents visited, from 0 to exactly 1 for SMC chains.
    pub phi_history: Vec<f64>,
    /// Mean mutation acceptance rate per tempering stage (or one entry for
    /// random-walk chains).
    pub acceptance_rates: Vec<f64>,
    /// Mutation steps used per tempering stage.
    pub n_steps_history: Vec<usize>,
    /// Free-form metadata (config hash, stage name, ...).
    pub extra: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
struct ChainMeta {
    chain_id: usize,
    seed: u64,
    phi_history: Vec<f64>,
    acceptance_rates: Vec<f64>,
    n_steps_history: Vec<usize>,
    #[serde(default)]
    extra: BTreeMap<String, String>,
}

impl ChainDraws {
    pub fn n_draws(&self) -> usize {
        self.draws.len()
    }

    pub fn n_params(&self) -> usize {
        self.names.len()
    }

    pub fn validate(&self) -> Result<()> {
        for row in &self.draws {
            if row.len() != self.names.len() {
                return Err(Error::ChainFile(format!(
                    "draw row has {} values, expected {}",
                    row.len(),
                    self.names.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::ChainFile("non-finite draw value".into()));
            }
        }
        if self.log_likelihood.len() != self.draws.len() {
            return Err(Error::ChainFile(
                "log-likelihood length does not match the draw count".into(),
            ));
        }
        if !self.phi_history.is_empty() {
            let phis = &self.phi_history;
            if phis[0] != 0.0 || *phis.last().unwrap() != 1.0 {
                return Err(Error::ChainFile(
                    "tempering history must run from 0 to exactly 1".into(),
                ));
            }
            if phis.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::ChainFile("tempering history must not decrease".into()));
            }
        }
        Ok(())
    }

    /// All draws of one named parameter.
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self
            .names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownParam(name.to_string()))?;
        Ok(self.draws.iter().map(|row| row[idx]).collect())
    }

    fn meta_path(path: &Path) -> PathBuf {
        path.with_extension("meta.json")
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let io_err = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
        let write = |out: &mut BufWriter<File>| -> std::io::Result<()> {
            writeln!(out, "{},log_likelihood", self.names.join(","))?;
            let mut row = String::new();
            for (draw, ll) in self.draws.iter().zip(&self.log_likelihood) {
                row.clear();
                for (i, v) in draw.iter().enumerate() {
                    if i > 0 {
                        row.push(',');
                    }
                    push_value(&mut row, *v);
                }
                row.push(',');
                push_value(&mut row, *ll);
                writeln!(out, "{row}")?;
            }
            out.flush()
        };
        write(&mut out).map_err(io_err)?;

        let meta = ChainMeta {
            chain_id: self.chain_id,
            seed: self.seed,
            phi_history: self.phi_history.clone(),
            acceptance_rates: self.acceptance_rates.clone(),
            n_steps_history: self.n_steps_history.clone(),
            extra: self.extra.clone(),
        };
        let meta_path = Self::meta_path(path);
        let file = File::create(&meta_path).map_err(|source| Error::Io {
            path: meta_path.clone(),
            source,
        })?;
        serde_json::to_writer_pretty(BufWriter::new(file), &meta)
            .map_err(|e| Error::ChainFile(format!("{}: {e}", meta_path.display())))?;
        Ok(())
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<ChainDraws> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut lines = BufReader::new(file).lines().enumerate();

        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::ChainFile(format!("{}: empty file", path.display())))?;
        let header = header.map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
        if names.last().map(String::as_str) != Some("log_likelihood") {
            return Err(Error::ChainFile(format!(
                "{}: last column must be log_likelihood",
                path.display()
            )));
        }
        names.pop();
        if names.is_empty() {
            return Err(Error::ChainFile(format!(
                "{}: no parameter columns",
                path.display()
            )));
        }

        let mut draws = Vec::new();
        let mut log_likelihood = Vec::new();
        for (idx, line) in lines {
            let line = line.map_err(|source| Error::Io {
                path: path.to_path_buf(),
                source,
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != names.len() + 1 {
                return Err(Error::CsvParse {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    message: format!("row has {} cells, expected {}", cells.len(), names.len() + 1),
                });
            }
            let mut row = Vec::with_capacity(names.len());
            for cell in &cells[..names.len()] {
                row.push(cell.trim().parse::<f64>().map_err(|_| Error::CsvParse {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    message: format!("cell '{}' is not a number", cell.trim()),
                })?);
            }
            let ll = cells[names.len()]
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::CsvParse {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    message: "log_likelihood cell is not a number".into(),
                })?;
            draws.push(row);
            log_likelihood.push(ll);
        }

        let meta_path = Self::meta_path(path);
        let meta: Option<ChainMeta> = match File::open(&meta_path) {
            Ok(file) => Some(
                serde_json::from_reader(BufReader::new(file))
                    .map_err(|e| Error::ChainFile(format!("{}: {e}", meta_path.display())))?,
            ),
            Err(_) => None,
        };

        let chain = match meta {
            Some(meta) => ChainDraws {
                chain_id: meta.chain_id,
                seed: meta.seed,
                names,
                draws,
                log_likelihood,
                phi_history: meta.phi_history,
                acceptance_rates: meta.acceptance_rates,
                n_steps_history: meta.n_steps_history,
                extra: meta.extra,
            },
            None => ChainDraws {
                chain_id: 0,
                seed: 0,
                names,
                draws,
                log_likelihood,
                phi_history: Vec::new(),
                acceptance_rates: Vec::new(),
                n_steps_history: Vec::new(),
                extra: BTreeMap::new(),
            },
        };
        chain.validate()?;
        Ok(chain)
    }
}

fn push_value(row: &mut String, value: f64) {
    use std::fmt::Write as _;
    write!(row, "{value}").unwrap();
}

/// Concatenate one parameter's draws across chains.
pub fn pooled_column(chains: &[ChainDraws], name: &str) -> Result<Vec<f64>> {
    let mut pooled = Vec::new();
    for chain in chains {
        pooled.extend(chain.column(name)?);
    }
    Ok(pooled)
}

/// Pooled posterior mean of one parameter.
pub fn pooled_mean(chains: &[ChainDraws], name: &str) -> Result<f64> {
    let pooled = pooled_column(chains, name)?;
    Ok(crate::math::mean(&pooled))
}
