use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{FilterMode, FilterSpec, SeriesFormat};
use crate::dynsys::{FlowSystem, RealizationMode, SystemSpec};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, Stage};
use crate::rnn::{AdamConfig, TrainConfig};
use crate::spectral::{Algorithm, SurrogateConfig};

/// Flat run description. Missing keys take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// `logistic`, `henon`, `lorenz`, `rossler`, `chua`, `ar1` or `file`.
    pub system: String,
    /// Record to window when `system` is `file`.
    pub input: Option<PathBuf>,
    /// `column` or `row`.
    pub input_format: String,
    /// `independent` or `windowed`; files are always windowed.
    pub mode: Option<String>,
    /// AR coefficient for `ar1`.
    pub alpha: f64,
    /// Sampling interval for flows; the system default when absent.
    pub dt: Option<f64>,
    #[serde(rename = "L")]
    pub len: usize,
    #[serde(rename = "N")]
    pub count: usize,

    pub surrogate: String,
    pub max_iter: usize,
    pub tolerance: f64,
    pub standardize: bool,

    pub filter_cutoff_hz: Option<f64>,
    pub sampling_rate_hz: Option<f64>,
    pub filter_mode: FilterMode,

    pub train_frac: f64,
    pub val_frac: f64,

    pub hidden: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub clip_norm: Option<f64>,
    pub smoothing_window: usize,
    pub significance: f64,

    pub seed: u64,
    pub generation_seed: Option<u64>,
    pub surrogate_seed: Option<u64>,
    pub split_seed: Option<u64>,
    pub init_seed: Option<u64>,
    pub shuffle_seed: Option<u64>,

    /// Never written to the frozen copy.
    #[serde(skip_serializing)]
    pub out_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let adam = AdamConfig::default();
        Self {
            system: "logistic".into(),
            input: None,
            input_format: "column".into(),
            mode: None,
            alpha: 0.2,
            dt: None,
            len: 32,
            count: 1000,
            surrogate: "iaaft".into(),
            max_iter: 100,
            tolerance: 1e-8,
            standardize: true,
            filter_cutoff_hz: None,
            sampling_rate_hz: None,
            filter_mode: FilterMode::Causal,
            train_frac: 0.75,
            val_frac: 0.30,
            hidden: 10,
            epochs: 400,
            batch_size: 16,
            lr: adam.lr,
            clip_norm: adam.clip_norm,
            smoothing_window: 5,
            significance: 0.05,
            seed: 0,
            generation_seed: None,
            surrogate_seed: None,
            split_seed: None,
            init_seed: None,
            shuffle_seed: None,
            out_dir: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageSeeds {
    pub generation: u64,
    pub surrogate: u64,
    pub split: u64,
    pub init: u64,
    pub shuffle: u64,
}

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl RunConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| cfg_err(format!("config: {e}")))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&fs::read_to_string(path)?)
    }

    pub fn is_file_source(&self) -> bool {
        self.system == "file"
    }

    /// Checks every field; nothing is computed before this passes.
    pub fn validate(&self) -> Result<()> {
        if self.len < 8 {
            return Err(cfg_err(format!("L must be at least 8, got {}", self.len)));
        }
        if self.count < 3 {
            return Err(cfg_err(format!("N must be at least 3 to form three splits, got {}", self.count)));
        }
        if self.is_file_source() {
            let input = self.input.as_ref().ok_or_else(|| cfg_err("system `file` needs `input`"))?;
            if !input.is_file() {
                return Err(cfg_err(format!("input {} does not exist", input.display())));
            }
            self.input_format.parse::<SeriesFormat>().map_err(|e| cfg_err(e.to_string()))?;
            if self.realization_mode()? == RealizationMode::Independent {
                return Err(cfg_err("a recorded series can only be sampled in windowed mode"));
            }
        } else {
            SystemSpec::<f64>::by_name(&self.system).map_err(|e| cfg_err(e.to_string()))?;
            self.realization_mode()?;
        }
        if self.system == "ar1" && !(self.alpha.abs() < 1.0) {
            return Err(cfg_err(format!("AR coefficient must satisfy |alpha| < 1, got {}", self.alpha)));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(cfg_err(format!("dt must be positive, got {dt}")));
            }
        }
        self.surrogate_config(0)?.validate().map_err(|e| cfg_err(e.to_string()))?;
        if let Some(spec) = self.filter_spec()? {
            spec.validate().map_err(|e| cfg_err(e.to_string()))?;
        }
        for (name, v) in [("train_frac", self.train_frac), ("val_frac", self.val_frac), ("significance", self.significance)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(cfg_err(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        if self.epochs == 0 {
            return Err(cfg_err("epochs must be at least 1"));
        }
        self.train_config(&self.seeds()).validate().map_err(|e| cfg_err(e.to_string()))?;
        Ok(())
    }

    pub fn realization_mode(&self) -> Result<RealizationMode> {
        match self.mode.as_deref() {
            None if self.is_file_source() => Ok(RealizationMode::Windowed),
            None | Some("independent") => Ok(RealizationMode::Independent),
            Some("windowed") => Ok(RealizationMode::Windowed),
            Some(other) => Err(cfg_err(format!("unknown mode `{other}`"))),
        }
    }

    /// The generating system with config overrides applied.
    pub fn system_spec(&self) -> Result<SystemSpec<f64>> {
        let spec = SystemSpec::by_name(&self.system)?;
        Ok(match spec {
            SystemSpec::Ar1 { .. } => SystemSpec::Ar1 { alpha: self.alpha },
            SystemSpec::Flow { system, params, dt, tol } => {
                SystemSpec::Flow { system, params, dt: self.dt.unwrap_or(dt), tol }
            }
            other => other,
        })
    }

    pub fn filter_spec(&self) -> Result<Option<FilterSpec>> {
        match (self.filter_cutoff_hz, self.sampling_rate_hz) {
            (None, _) => Ok(None),
            (Some(_), None) => Err(cfg_err("a filter cutoff needs `sampling_rate_hz`")),
            (Some(cutoff_hz), Some(sampling_rate_hz)) => {
                Ok(Some(FilterSpec { order: 4, cutoff_hz, sampling_rate_hz, mode: self.filter_mode }))
            }
        }
    }

    pub fn seeds(&self) -> StageSeeds {
        let d = |s: Option<u64>, stage| s.unwrap_or_else(|| derive_seed(self.seed, stage));
        StageSeeds {
            generation: d(self.generation_seed, Stage::Generation),
            surrogate: d(self.surrogate_seed, Stage::Surrogate),
            split: d(self.split_seed, Stage::Split),
            init: d(self.init_seed, Stage::Init),
            shuffle: d(self.shuffle_seed, Stage::Shuffle),
        }
    }

    /// Copy with every stage seed written out explicitly.
    pub fn resolved(&self) -> Self {
        let s = self.seeds();
        Self {
            generation_seed: Some(s.generation),
            surrogate_seed: Some(s.surrogate),
            split_seed: Some(s.split),
            init_seed: Some(s.init),
            shuffle_seed: Some(s.shuffle),
            ..self.clone()
        }
    }

    pub fn surrogate_config(&self, seed: u64) -> Result<SurrogateConfig> {
        Ok(SurrogateConfig {
            algorithm: self.surrogate.parse::<Algorithm>().map_err(|e| cfg_err(e.to_string()))?,
            max_iter: self.max_iter,
            tolerance: self.tolerance,
            seed,
        })
    }

    pub fn train_config(&self, seeds: &StageSeeds) -> TrainConfig {
        TrainConfig {
            hidden: self.hidden,
            epochs: self.epochs,
            batch_size: self.batch_size,
            adam: AdamConfig { lr: self.lr, clip_norm: self.clip_norm, ..AdamConfig::default() },
            init_seed: seeds.init,
            shuffle_seed: seeds.shuffle,
            smoothing_window: self.smoothing_window,
        }
    }

    /// Frozen JSON: resolved seeds, no output directory.
    pub fn frozen_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.resolved())? + "\n")
    }

    /// A short directory name describing the run.
    pub fn run_name(&self) -> String {
        let system = match self.system.as_str() {
            "ar1" => format!("ar1_a{}", self.alpha),
            "file" => self
                .input
                .as_ref()
                .and_then(|p| p.file_stem())
                .map(|s| format!("file_{}", s.to_string_lossy()))
                .unwrap_or_else(|| "file".into()),
            s => s.to_string(),
        };
        format!("{system}_L{}_N{}_H{}_seed{}", self.len, self.count, self.hidden, self.seed)
    }

    pub fn flow_system(&self) -> Option<FlowSystem> {
        self.system.parse().ok()
    }
}
