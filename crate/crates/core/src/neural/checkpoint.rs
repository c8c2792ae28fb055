//! Versioned JSON checkpoints: layer shapes plus row-major parameter arrays.
//! Floats are written in shortest round-trip form, so save/load is lossless.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::features::{FEATURE_DIM, FEATURE_VERSION};
use super::network::{Model, ModelConfig};
use crate::error::{Error, Result};

pub const CHECKPOINT_FORMAT: &str = "obbm-mpnn";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub name: String,
    pub shape: [usize; 2],
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub feature_version: u32,
    pub feature_dim: usize,
    pub config: ModelConfig,
    pub blocks: Vec<Block>,
}

impl Checkpoint {
    pub fn from_model(model: &Model) -> Self {
        let blocks = model
            .layout()
            .blocks()
            .into_iter()
            .map(|(name, off, rows, cols)| Block {
                name,
                shape: [rows, cols],
                values: model.params[off..off + rows * cols].to_vec(),
            })
            .collect();
        Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            feature_version: FEATURE_VERSION,
            feature_dim: FEATURE_DIM,
            config: model.config,
            blocks,
        }
    }

    pub fn into_model(self) -> Result<Model> {
        if self.format != CHECKPOINT_FORMAT || self.version != CHECKPOINT_VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported checkpoint {} v{}",
                self.format, self.version
            )));
        }
        if self.feature_version != FEATURE_VERSION || self.feature_dim != FEATURE_DIM {
            return Err(Error::ShapeMismatch(format!(
                "checkpoint features v{} ({} dims), expected v{FEATURE_VERSION} ({FEATURE_DIM} dims)",
                self.feature_version, self.feature_dim
            )));
        }
        let mut model = Model::zeros(self.config)?;
        let expected = model.layout().blocks();
        if expected.len() != self.blocks.len() {
            return Err(Error::ShapeMismatch("checkpoint block count does not match config".into()));
        }
        for ((name, off, rows, cols), block) in expected.into_iter().zip(self.blocks) {
            if block.name != name || block.shape != [rows, cols] || block.values.len() != rows * cols {
                return Err(Error::ShapeMismatch(format!("checkpoint block {} has the wrong shape", block.name)));
            }
            model.params[off..off + rows * cols].copy_from_slice(&block.values);
        }
        Model::from_params(model.config, model.params)
    }
}

pub fn save_model(model: &Model, path: impl AsRef<Path>) -> Result<()> {
    let json = serde_json::to_string_pretty(&Checkpoint::from_model(model))?;
    std::fs::write(path, json + "\n")?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let ck: Checkpoint = serde_json::from_str(&text).map_err(|e| Error::MalformedFile {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    ck.into_model()
}

pub fn model_to_json(model: &Model) -> Result<String> {
    Ok(serde_json::to_string_pretty(&Checkpoint::from_model(model))?)
}

pub fn model_from_json(s: &str) -> Result<Model> {
    serde_json::from_str::<Checkpoint>(s)?.into_model()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let m = Model::init(ModelConfig { hidden: 5, mp_layers: 2, mlp_layers: 2 }, 11).unwrap();
        let back = model_from_json(&model_to_json(&m).unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn rejects_other_versions() {
        let m = Model::zeros(ModelConfig { hidden: 2, mp_layers: 1, mlp_layers: 1 }).unwrap();
        let mut ck = Checkpoint::from_model(&m);
        ck.version = 99;
        assert!(ck.into_model().is_err());
        let mut ck = Checkpoint::from_model(&m);
        ck.blocks.pop();
        assert!(ck.into_model().is_err());
    }
}
