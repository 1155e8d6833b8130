use std::path::{Path, PathBuf};

use arrowvqa_core::question::QuestionConfig;
use arrowvqa_core::render::{CameraSpec, StyleConfig};
use arrowvqa_core::scene::SamplerConfig;
use arrowvqa_core::split::SplitFractions;
use serde::{Deserialize, Serialize};

/// Everything that determines a build. Loadable from TOML; every field has a
/// default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BuildConfig {
    pub total_scenes: u64,
    pub split_fractions: SplitFractions,
    pub master_seed: u64,
    /// Write PNGs. Question-only builds skip the renderer.
    pub render: bool,
    /// Output directory.
    pub out: Option<PathBuf>,
    /// Directory holding templates.json, synonyms.json and metadata.json.
    /// The built-in assets are used when unset.
    pub templates: Option<PathBuf>,
    pub sampler: SamplerConfig,
    pub camera: CameraSpec,
    pub style: StyleConfig,
    pub questions: QuestionConfig,
}

impl Default for BuildConfig {
    fn default() -> Self {
        Self {
            total_scenes: 8000,
            split_fractions: SplitFractions::default(),
            master_seed: 0,
            render: true,
            out: None,
            templates: None,
            sampler: SamplerConfig::default(),
            camera: CameraSpec::default(),
            style: StyleConfig::default(),
            questions: QuestionConfig::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: toml::de::Error },
    #[error("invalid config: {0}")]
    Invalid(String),
}

impl BuildConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |e: &dyn std::fmt::Display| ConfigError::Invalid(e.to_string());
        if self.total_scenes == 0 {
            return Err(ConfigError::Invalid("total_scenes must be at least 1".into()));
        }
        self.split_fractions.validate().map_err(|e| invalid(&e))?;
        self.sampler.validate().map_err(|e| invalid(&e))?;
        self.camera.validate().map_err(|e| invalid(&e))?;
        self.style.validate().map_err(|e| invalid(&e))?;
        if !self.questions.realize.is_valid() {
            return Err(ConfigError::Invalid("p_omit and p_syn must lie in [0, 1]".into()));
        }
        Ok(())
    }

    /// The part of the config that shapes the output, without local paths.
    pub fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            total_scenes: self.total_scenes,
            split_fractions: self.split_fractions,
            master_seed: self.master_seed,
            render: self.render,
            sampler: self.sampler.clone(),
            camera: self.camera.clone(),
            style: self.style.clone(),
            questions: self.questions,
        }
    }
}

/// Config as recorded in the manifest. Paths are left out so that the same
/// build in two directories yields the same manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub total_scenes: u64,
    pub split_fractions: SplitFractions,
    pub master_seed: u64,
    pub render: bool,
    pub sampler: SamplerConfig,
    pub camera: CameraSpec,
    pub style: StyleConfig,
    pub questions: QuestionConfig,
}
