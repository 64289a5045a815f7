//! Run configuration: one TOML file with a section per component. Every key
//! is optional; missing keys take the built-in defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::itclust::ClusterParams;
use crate::metrics::MetricsConfig;
use crate::pri::PriConfig;
use crate::season::Method;
use crate::srrm::{CvConfig, SrrmConfig};
use crate::synth::{CropCalendar, SceneSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub seed: u64,
    /// Days of year to process; empty means the whole season. Requested days
    /// snap to the nearest scene day.
    pub days: Vec<u32>,
    /// Day-level worker threads; 0 uses every available core.
    pub jobs: usize,
    pub method: Method,
    /// Day whose per-iteration error is exported; 0 disables the export.
    pub trace_day: u32,
    pub trace_iterations: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            seed: 42,
            days: Vec::new(),
            jobs: 0,
            method: Method::Both,
            trace_day: 223,
            trace_iterations: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegressionSection {
    pub mu: f64,
    pub sigma: Option<f64>,
}

impl Default for RegressionSection {
    fn default() -> Self {
        RegressionSection { mu: 1e-2, sigma: None }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    pub synth: SceneSpec,
    pub calendar: CropCalendar,
    pub cluster: ClusterParams,
    pub regression: RegressionSection,
    pub cv: CvConfig,
    pub pri: PriConfig,
    pub metrics: MetricsConfig,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

impl RunConfig {
    pub fn parse(text: &str, path: &Path) -> Result<RunConfig> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.span().map_or(0, |s| line_of(text, s.start)),
            message: e.message().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RunConfig::parse(&text, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.synth.validate()?;
        self.calendar.validate()?;
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.cv.enabled && (self.cv.k_values.is_empty() || self.cv.psi_values.is_empty() || self.cv.mu_values.is_empty()) {
            return bad("cross-validation grids must not be empty");
        }
        if self.cv.folds < 2 {
            return bad("at least 2 cross-validation folds are required");
        }
        if self.cv.mu_values.iter().chain([&self.regression.mu]).any(|&m| !(m >= 0.0)) {
            return bad("ridge constants must be non-negative");
        }
        if self.pri.sm_bins < 2 || self.pri.feature_bins < 2 {
            return bad("PRI needs at least 2 bins per variable");
        }
        if self.metrics.kld.bins == 0 {
            return bad("KL divergence needs at least one bin");
        }
        Ok(())
    }

    pub fn srrm(&self) -> SrrmConfig {
        SrrmConfig {
            cluster: self.cluster.clone(),
            mu: self.regression.mu,
            regression_sigma: self.regression.sigma,
            cv: self.cv.clone(),
        }
    }
}
