//! JSON checkpoints: a format tag, a version, the encoder config and
//! every matrix with its shape. `f64` values round-trip exactly.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::encoder::{EncoderConfig, Model, ModelParams};
use crate::error::{Error, Result};

pub const CHECKPOINT_FORMAT: &str = "robust-gnn/checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub feature_dim: usize,
    pub n_classes: usize,
    pub config: EncoderConfig,
    pub params: ModelParams,
}

impl Checkpoint {
    pub fn new(model: &Model, feature_dim: usize, n_classes: usize) -> Self {
        Self {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            feature_dim,
            n_classes,
            config: model.config.clone(),
            params: model.params.clone(),
        }
    }

    pub fn into_model(self) -> Model {
        Model::new(self.config, self.params)
    }
}

pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<()> {
    let text = serde_json::to_string(ckpt).map_err(|e| Error::Checkpoint(e.to_string()))?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let ckpt: Checkpoint = serde_json::from_str(&text).map_err(|e| Error::Checkpoint(e.to_string()))?;
    if ckpt.format != CHECKPOINT_FORMAT || ckpt.version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported checkpoint {} v{}",
            ckpt.format, ckpt.version
        )));
    }
    ckpt.params
        .check(&ckpt.config, ckpt.feature_dim, ckpt.n_classes)?;
    Ok(ckpt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let cfg = EncoderConfig::refined();
        let params = ModelParams::init(&cfg, 40, 3, 11).unwrap();
        let ckpt = Checkpoint::new(&Model::new(cfg, params), 40, 3);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        save_checkpoint(&path, &ckpt).unwrap();
        let back = load_checkpoint(&path).unwrap();
        assert_eq!(back, ckpt);
        assert_eq!(back.params.fingerprint(), ckpt.params.fingerprint());
    }

    #[test]
    fn shape_tampering_rejected() {
        let cfg = EncoderConfig::refined();
        let mut params = ModelParams::init(&cfg, 40, 3, 11).unwrap();
        params.decoder = crate::kernel::Tensor::zeros(16, 4);
        let ckpt = Checkpoint::new(&Model::new(cfg, params), 40, 3);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        save_checkpoint(&path, &ckpt).unwrap();
        assert!(load_checkpoint(&path).is_err());
    }
}
