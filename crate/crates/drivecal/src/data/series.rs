use std::collections::BTreeMap;

use indexmap::IndexMap;

use crate::error::{Error, Result};

/// Uniformly sampled, named real-valued channels over a shared time axis.
///
/// Immutable after construction. Metadata is a flat string map that travels
/// with the series through CSV round trips.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    t: Vec<f64>,
    channels: IndexMap<String, Vec<f64>>,
    pub meta: BTreeMap<String, String>,
}

/// Relative tolerance for time-axis uniformity.
const UNIFORMITY_TOL: f64 = 1e-9;

impl TimeSeries {
    pub fn new(t: Vec<f64>, channels: IndexMap<String, Vec<f64>>) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::EmptyChannels);
        }
        for (name, values) in &channels {
            if values.len() != t.len() {
                return Err(Error::ChannelLengthMismatch {
                    channel: name.clone(),
                    len: values.len(),
                    expected: t.len(),
                });
            }
        }
        if t.is_empty() {
            return Err(Error::NotEnoughSamples {
                got: 0,
                required: 1,
            });
        }
        if t.len() >= 2 {
            let dt = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
            if !(dt > 0.0) {
                return Err(Error::NonUniformTime { index: 1 });
            }
            let scale = t[0].abs().max(t[t.len() - 1].abs()).max(1.0);
            for i in 1..t.len() {
                if t[i] <= t[i - 1] {
                    return Err(Error::NonUniformTime { index: i });
                }
                let expected = t[0] + i as f64 * dt;
                if (t[i] - expected).abs() > UNIFORMITY_TOL * scale {
                    return Err(Error::NonUniformTime { index: i });
                }
            }
        }
        Ok(TimeSeries {
            t,
            channels,
            meta: BTreeMap::new(),
        })
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<String>) -> Self {
        self.meta.insert(key.to_string(), value.into());
        self
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Sample interval, s.
    pub fn sample_dt(&self) -> f64 {
        if self.t.len() < 2 {
            0.0
        } else {
            (self.t[self.t.len() - 1] - self.t[0]) / (self.t.len() - 1) as f64
        }
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.channels.get(name).map(|v| v.as_slice())
    }

    pub fn channel_names(&self) -> Vec<&str> {
        self.channels.keys().map(|s| s.as_str()).collect()
    }

    pub fn channels(&self) -> &IndexMap<String, Vec<f64>> {
        &self.channels
    }

    pub(crate) fn require(&self, name: &str) -> Result<&[f64]> {
        self.channel(name).ok_or_else(|| Error::UnknownChannel {
            name: name.to_string(),
            available: self.channel_names().join(", "),
        })
    }

    /// Sub-series over `[t_lo, t_hi]` (inclusive, 1e-9 s slack at the ends).
    pub fn window(&self, t_lo: f64, t_hi: f64) -> Result<TimeSeries> {
        let idx: Vec<usize> = (0..self.t.len())
            .filter(|&i| self.t[i] >= t_lo - 1e-9 && self.t[i] <= t_hi + 1e-9)
            .collect();
        if idx.is_empty() {
            return Err(Error::NotEnoughSamples {
                got: 0,
                required: 1,
            });
        }
        let t = idx.iter().map(|&i| self.t[i]).collect();
        let channels = self
            .channels
            .iter()
            .map(|(name, values)| (name.clone(), idx.iter().map(|&i| values[i]).collect()))
            .collect();
        let mut out = TimeSeries::new(t, channels)?;
        out.meta = self.meta.clone();
        Ok(out)
    }

    /// Keep every `stride`-th sample, starting with the first.
    pub fn downsample(&self, stride: usize) -> Result<TimeSeries> {
        if stride == 0 {
            return Err(Error::Config("downsample stride must be positive".into()));
        }
        let t = self.t.iter().copied().step_by(stride).collect();
        let channels = self
            .channels
            .iter()
            .map(|(name, values)| {
                (
                    name.clone(),
                    values.iter().copied().step_by(stride).collect(),
                )
            })
            .collect();
        let mut out = TimeSeries::new(t, channels)?;
        out.meta = self.meta.clone();
        Ok(out)
    }

    /// Restrict to the named channels, preserving their order here.
    pub fn select(&self, names: &[&str]) -> Result<TimeSeries> {
        let mut channels = IndexMap::new();
        for &name in names {
            channels.insert(name.to_string(), self.require(name)?.to_vec());
        }
        let mut out = TimeSeries::new(self.t.clone(), channels)?;
        out.meta = self.meta.clone();
        Ok(out)
    }
}
