use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Where a series came from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SeriesMeta {
    pub system: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub burn_in: usize,
}

impl SeriesMeta {
    pub fn new(system: impl Into<String>) -> Self {
        Self { system: system.into(), ..Default::default() }
    }

    pub fn param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }
}

/// Ordered, finite, non-empty samples plus provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T> {
    samples: Vec<T>,
    dt: Option<T>,
    meta: SeriesMeta,
}

impl<T: Scalar> TimeSeries<T> {
    pub fn new(samples: Vec<T>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Length("time series must have at least one sample".into()));
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::Numeric { step: i, what: "time series sample" });
        }
        Ok(Self { samples, dt: None, meta: SeriesMeta::default() })
    }

    pub fn with_meta(mut self, meta: SeriesMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn with_dt(mut self, dt: T) -> Self {
        self.dt = Some(dt);
        self
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dt(&self) -> Option<T> {
        self.dt
    }

    pub fn meta(&self) -> &SeriesMeta {
        &self.meta
    }

    /// Copies `[start, start + len)` into a new series that keeps this one's metadata.
    pub fn window(&self, start: usize, len: usize) -> Result<Self> {
        if start + len > self.samples.len() || len == 0 {
            return Err(Error::Length(format!(
                "window [{start}, {}) out of range for series of length {}",
                start + len,
                self.samples.len()
            )));
        }
        Ok(Self {
            samples: self.samples[start..start + len].to_vec(),
            dt: self.dt,
            meta: self.meta.clone(),
        })
    }
}

impl<T> AsRef<[T]> for TimeSeries<T> {
    fn as_ref(&self) -> &[T] {
        &self.samples
    }
}
