//! Run configuration: one TOML document with a table per component.
//!
//! ```toml
//! [run]
//! workers = 4
//!
//! [null]
//! draws = 10000
//! master_seed = 7
//!
//! [pipeline]
//! ils_threshold = 0.25
//! ```
//!
//! Every table and key is optional; unknown keys are rejected.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ils::IlsParams;
use crate::pipeline::PipelineConfig;
use crate::screens::{CompositeConfig, LifecycleConfig};
use crate::signrand::{MarketMakerConfig, NullSpec};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config syntax: {0}")]
    Parse(String),
    #[error("config value out of range: {0}")]
    Range(String),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    /// Worker threads; all cores when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

/// Analysis parameters. Everything that can change a result lives here;
/// execution settings such as worker count do not.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    pub null: NullSpec,
    pub market_maker: MarketMakerConfig,
    pub lifecycle: LifecycleConfig,
    pub composite: CompositeConfig,
    pub ils: IlsParams,
    pub pipeline: PipelineConfig,
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.null.validate().map_err(ConfigError::Range)?;
        self.market_maker.validate().map_err(ConfigError::Range)?;
        self.lifecycle.validate().map_err(ConfigError::Range)?;
        self.composite.weights.validate().map_err(ConfigError::Range)?;
        if !(self.composite.timing_window_hours > 0.0) {
            return Err(ConfigError::Range("composite.timing_window_hours must be > 0".into()));
        }
        self.ils.validate().map_err(ConfigError::Range)?;
        self.pipeline.validate().map_err(ConfigError::Range)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub run: RunSection,
    pub null: NullSpec,
    pub market_maker: MarketMakerConfig,
    pub lifecycle: LifecycleConfig,
    pub composite: CompositeConfig,
    pub ils: IlsParams,
    pub pipeline: PipelineConfig,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<RunConfig, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.analysis().validate()?;
        if cfg.run.workers == Some(0) {
            return Err(ConfigError::Range("run.workers must be >= 1".into()));
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn analysis(&self) -> AnalysisConfig {
        AnalysisConfig {
            null: self.null.clone(),
            market_maker: self.market_maker.clone(),
            lifecycle: self.lifecycle.clone(),
            composite: self.composite.clone(),
            ils: self.ils.clone(),
            pipeline: self.pipeline.clone(),
        }
    }
}
