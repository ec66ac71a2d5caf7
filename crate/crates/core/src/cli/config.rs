//! JSON run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::fem::{Mesh1D, ParameterBox};
use crate::offline::{Budget, MeshDescriptor};
use crate::truth::SchemeConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    pub seed: u64,
    #[serde(rename = "N_train")]
    pub n_train: usize,
    #[serde(rename = "N_test")]
    pub n_test: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            n_train: 16,
            n_test: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RbConfig {
    #[serde(rename = "NV_tilde")]
    pub nv_tilde: usize,
    #[serde(rename = "NW")]
    pub nw: usize,
}

impl Default for RbConfig {
    fn default() -> Self {
        Self { nv_tilde: 8, nw: 8 }
    }
}

impl From<RbConfig> for Budget {
    fn from(rb: RbConfig) -> Self {
        Budget {
            nv_tilde: rb.nv_tilde,
            nw: rb.nw,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IoConfig {
    pub output_dir: PathBuf,
    /// Defaults to `model.json` inside `output_dir`.
    pub model_path: Option<PathBuf>,
}

impl Default for IoConfig {
    fn default() -> Self {
        Self {
            output_dir: PathBuf::from("out"),
            model_path: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mesh: MeshDescriptor,
    pub time: SchemeConfig,
    #[serde(rename = "box")]
    pub bounds: ParameterBox,
    pub sampling: SamplingConfig,
    pub rb: RbConfig,
    pub io: IoConfig,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, String> {
        let config: Self = serde_json::from_str(text).map_err(|e| e.to_string())?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn validate(&self) -> Result<(), String> {
        Mesh1D::new(self.mesh.interior, self.mesh.s_f).map_err(|e| e.to_string())?;
        self.time.validate().map_err(|e| e.to_string())?;
        self.bounds.validate().map_err(|e| e.to_string())?;
        if self.sampling.n_train == 0 || self.sampling.n_test == 0 {
            return Err("N_train and N_test must be positive".into());
        }
        if self.rb.nv_tilde == 0 {
            return Err("NV_tilde must be positive".into());
        }
        Ok(())
    }

    pub fn model_path(&self) -> PathBuf {
        self.io
            .model_path
            .clone()
            .unwrap_or_else(|| self.io.output_dir.join("model.json"))
    }
}
