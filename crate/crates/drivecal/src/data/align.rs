//! Residuals of a model trajectory against calibration data.
//!
//! The data grid must be a subset of the model grid; no interpolation is
//! performed, so grid mismatches surface as errors instead of being hidden.

use super::series::TimeSeries;
use crate::error::{Error, Result};

/// Absolute tolerance for matching sample times, s.
const TIME_MATCH_TOL: f64 = 1e-9;

/// Per-channel residuals `model - data` at the data sample times.
#[derive(Debug, Clone)]
pub struct ResidualMatrix {
    pub channels: Vec<String>,
    /// One residual vector per channel, each of the data's length.
    pub residuals: Vec<Vec<f64>>,
}

impl ResidualMatrix {
    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.channels
            .iter()
            .position(|c| c == name)
            .map(|i| self.residuals[i].as_slice())
    }
}

pub fn align(model: &TimeSeries, data: &TimeSeries, channels: &[&str]) -> Result<ResidualMatrix> {
    let model_t = model.t();
    let model_dt = model.sample_dt();

    // Map each data time onto the model grid.
    let mut indices = Vec::with_capacity(data.len());
    for &t in data.t() {
        let idx = if model_dt > 0.0 {
            ((t - model_t[0]) / model_dt).round() as i64
        } else {
            0
        };
        if idx < 0 || idx as usize >= model_t.len() {
            return Err(Error::TimestampMismatch { t });
        }
        let idx = idx as usize;
        if (model_t[idx] - t).abs() > TIME_MATCH_TOL {
            return Err(Error::TimestampMismatch { t });
        }
        indices.push(idx);
    }

    let mut residuals = Vec::with_capacity(channels.len());
    for &name in channels {
        let model_ch = model.require(name)?;
        let data_ch = data.require(name)?;
        residuals.push(
            indices
                .iter()
                .zip(data_ch)
                .map(|(&i, &d)| model_ch[i] - d)
                .collect(),
        );
    }

    Ok(ResidualMatrix {
        channels: channels.iter().map(|s| s.to_string()).collect(),
        residuals,
    })
}
