//! TOML run configuration.
//!
//! ```toml
//! seed = 42
//!
//! [spec]
//! model = "powerlaw"   # "powerlaw" | "ar1" | "iid"
//! b = 7.0              # powerlaw only; ar1 takes `rho`
//! marginal = { kind = "normal" }   # "normal" | "exponential" (with `rate`) | "uniform"
//!
//! [series]
//! n = 4096
//!
//! [experiment]
//! p = 0.5
//! n_grid = [1024, 2048, 4096, 8192]
//! n_reps = 500
//! c_window = 1.0
//! margin = 0.05
//! summary = "median"   # "median" | "q90" | "mean"
//! metric = "remainder" # default for `rates`
//!
//! [var]
//! level = 0.95
//! confidence = 0.95
//! bandwidth = 46       # optional; floor(n^(1/3)) otherwise
//!
//! [check]
//! samples = 200000
//! rho = 0.5
//! ```
//!
//! Every section except `[spec]` is optional.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::assoc_gen::GeneratorSpec;
use crate::error::{Error, Result};
use crate::rate_lab::{ExperimentConfig, Metric, Summary};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub spec: GeneratorSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<SeriesSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub var: Option<VarSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<CheckSection>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesSection {
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "default_n_grid")]
    pub n_grid: Vec<usize>,
    #[serde(default = "default_n_reps")]
    pub n_reps: usize,
    #[serde(default = "default_c_window")]
    pub c_window: f64,
    #[serde(default = "default_margin")]
    pub margin: f64,
    #[serde(default)]
    pub summary: Summary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Metric>,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            p: default_p(),
            n_grid: default_n_grid(),
            n_reps: default_n_reps(),
            c_window: default_c_window(),
            margin: default_margin(),
            summary: Summary::default(),
            metric: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarSection {
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default = "default_level")]
    pub confidence: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<usize>,
}

impl Default for VarSection {
    fn default() -> Self {
        VarSection {
            level: default_level(),
            confidence: default_level(),
            bandwidth: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
}

fn default_p() -> f64 {
    0.5
}
fn default_n_grid() -> Vec<usize> {
    (10..=16).map(|k| 1usize << k).collect()
}
fn default_n_reps() -> usize {
    500
}
fn default_c_window() -> f64 {
    1.0
}
fn default_margin() -> f64 {
    crate::theory::DEFAULT_MARGIN
}
fn default_level() -> f64 {
    0.95
}

impl RunConfig {
    pub fn new(spec: GeneratorSpec, seed: u64) -> Self {
        RunConfig {
            seed,
            spec,
            series: None,
            experiment: None,
            var: None,
            check: None,
        }
    }

    /// Parse and validate. All failures are [`Error::Config`].
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.spec
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if let Some(s) = &self.series {
            if s.n < 2 {
                return Err(Error::Config("series.n must be at least 2".into()));
            }
        }
        if self.experiment.is_some() {
            self.experiment_config()?.validate()?;
        }
        Ok(())
    }

    pub fn series_len(&self, default: usize) -> usize {
        self.series.map_or(default, |s| s.n)
    }

    pub fn experiment_config(&self) -> Result<ExperimentConfig> {
        let e = self.experiment.clone().unwrap_or_default();
        let cfg = ExperimentConfig {
            spec: self.spec,
            p: e.p,
            n_grid: e.n_grid,
            n_reps: e.n_reps,
            seed: self.seed,
            c_window: e.c_window,
            margin: e.margin,
            summary: e.summary,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// SHA-256 of [`Self::canonical_json`], lowercase hex.
    pub fn hash(&self) -> String {
        hex_digest(self.canonical_json().as_bytes())
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
