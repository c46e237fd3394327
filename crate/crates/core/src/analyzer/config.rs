use serde::{Deserialize, Serialize};

use super::emit::Format;
use super::report::{AnalyzeOptions, Tolerances};
use crate::error::{Error, Result};
use crate::immersion::FdConfig;
use crate::models::{Model, ModelParams};

/// `{"model": name, "params": {...}, "grid": [...], "fd_step": ..., "margin": ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartConfig {
    pub model: String,
    #[serde(default)]
    pub params: ModelParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fd_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
}

impl ChartConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid chart config: {e}")))
    }

    /// Builds the registered model with this config's chart settings applied.
    pub fn build(&self) -> Result<Model> {
        let mut model = Model::from_name(&self.model, &self.params)?;
        if let Some(grid) = &self.grid {
            model = model.with_grid(grid.clone())?;
        }
        if let Some(step) = self.fd_step {
            let fd = FdConfig {
                step,
                ..*model.chart().fd()
            };
            model = model.with_fd(fd)?;
        }
        if let Some(margin) = self.margin {
            model = model.with_margin(margin)?;
        }
        Ok(model)
    }
}

/// Validated parameters of one CLI run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<ChartConfig>,
    pub tol: f64,
    pub seed: u64,
    pub restarts: usize,
    pub count: usize,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            chart: None,
            tol: Tolerances::default().hypothesis_tol,
            seed: 42,
            restarts: 32,
            count: 100_000,
            format: Format::Json,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(Error::Config(format!(
                "tol must be finite and nonnegative, got {}",
                self.tol
            )));
        }
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be at least 1".into()));
        }
        if self.count == 0 {
            return Err(Error::Config("count must be at least 1".into()));
        }
        if let Some(chart) = &self.chart {
            chart.build()?;
        }
        Ok(())
    }

    pub fn analyze_options(&self) -> AnalyzeOptions {
        AnalyzeOptions {
            tolerances: Tolerances {
                hypothesis_tol: self.tol,
                ..Tolerances::default()
            },
            seed: Some(self.seed),
            quadrature_nodes: None,
        }
    }
}
