//! `.tbm` checkpoints: one archive holding parameters, scaler, AIGC
//! thresholds, the tokenizer and the run configuration.

use super::head::DetectionHead;
use super::model::{BehaviorBranch, DetectorModel, TextBranch};
use crate::aigc_signals::Thresholds;
use crate::behavior_channel::{BehaviorEncoder, Scaler};
use crate::error::{Error, Result};
use crate::nn::archive::{read_archive, restore_params, write_archive};
use crate::nn::{Parameters, Tensor};
use crate::text_channel::{TextEncoder, Tokenizer, TransformerConfig};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::path::Path;

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"TBM1";
pub const SCHEMA_VERSION: u32 = 1;

/// A trained detector plus everything needed to featurize new users.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorBundle {
    pub model: DetectorModel<f32>,
    pub scaler: Scaler,
    pub thresholds: Thresholds,
    pub tokenizer: Tokenizer,
    /// Run configuration, stored verbatim.
    pub config: Value,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum TextSpec {
    Encoder { config: TransformerConfig, eps: f64 },
    RawEmbedding { vocab_size: usize, dim: usize },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum BehaviorSpec {
    Encoder { d_b: usize, d_m: usize, dropout: f64 },
    Raw { dim: usize },
}

#[derive(Serialize, Deserialize)]
struct Meta {
    schema_version: u32,
    text: TextSpec,
    behavior: BehaviorSpec,
    head_dropout: f64,
    scaler: Scaler,
    thresholds: Thresholds,
    tokenizer_vocab: String,
    tokenizer_sha256: String,
    config: Value,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl DetectorBundle {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let m = &self.model;
        let text = match &m.text {
            TextBranch::Encoder(e) => TextSpec::Encoder { config: e.transformer.config, eps: e.eps },
            TextBranch::RawEmbedding(t) => TextSpec::RawEmbedding { vocab_size: t.shape()[0], dim: t.shape()[1] },
        };
        let behavior = match &m.behavior {
            BehaviorBranch::Encoder(e) => BehaviorSpec::Encoder { d_b: e.input_dim(), d_m: e.output_dim(), dropout: e.dropout },
            BehaviorBranch::Raw(d) => BehaviorSpec::Raw { dim: *d },
        };
        let vocab = self.tokenizer.to_vocab_file();
        let meta = Meta {
            schema_version: SCHEMA_VERSION,
            text,
            behavior,
            head_dropout: m.head.dropout,
            scaler: self.scaler.clone(),
            thresholds: self.thresholds.clone(),
            tokenizer_sha256: sha256_hex(vocab.as_bytes()),
            tokenizer_vocab: vocab,
            config: self.config.clone(),
        };
        let mut tensors = m.params();
        tensors.extend(m.frozen());
        write_archive(CHECKPOINT_MAGIC, &serde_json::to_value(&meta)?, &tensors)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (meta, mut tensors) = read_archive(CHECKPOINT_MAGIC, bytes)?;
        let version = meta.get("schema_version").and_then(Value::as_u64);
        if version != Some(u64::from(SCHEMA_VERSION)) {
            return Err(Error::Checkpoint(format!("schema version {version:?}, expected {SCHEMA_VERSION}")));
        }
        let meta: Meta = serde_json::from_value(meta).map_err(|e| Error::Checkpoint(format!("manifest: {e}")))?;
        if sha256_hex(meta.tokenizer_vocab.as_bytes()) != meta.tokenizer_sha256 {
            return Err(Error::Checkpoint("tokenizer hash mismatch".into()));
        }
        let tokenizer = Tokenizer::from_vocab_file(&meta.tokenizer_vocab)?;
        let (text, d_h) = match meta.text {
            TextSpec::Encoder { config, eps } => {
                let mut e = TextEncoder::new(config, 0);
                e.eps = eps;
                (TextBranch::Encoder(e), config.d_model)
            }
            TextSpec::RawEmbedding { vocab_size, dim } => (TextBranch::RawEmbedding(Tensor::zeros(&[vocab_size, dim])), dim),
        };
        let (behavior, d_m) = match meta.behavior {
            BehaviorSpec::Encoder { d_b, d_m, dropout } => (BehaviorBranch::Encoder(BehaviorEncoder::new(d_b, d_m, dropout, 0)), d_m),
            BehaviorSpec::Raw { dim } => (BehaviorBranch::Raw(dim), dim),
        };
        let mut model = DetectorModel { text, behavior, head: DetectionHead::zeros(d_h + d_m, meta.head_dropout) };
        restore_params(&mut model, &mut tensors)?;
        for (name, slot) in model.frozen_mut() {
            let pos = tensors
                .iter()
                .position(|(n, _)| *n == name)
                .ok_or_else(|| Error::Checkpoint(format!("tensor {name} missing")))?;
            let (_, t) = tensors.swap_remove(pos);
            if t.shape() != slot.shape() {
                return Err(Error::Checkpoint(format!("tensor {name} has shape {:?}, expected {:?}", t.shape(), slot.shape())));
            }
            *slot = t;
        }
        if let Some((name, _)) = tensors.first() {
            return Err(Error::Checkpoint(format!("unexpected tensor {name}")));
        }
        if meta.scaler.dim() != model.behavior.input_dim() {
            return Err(Error::Checkpoint(format!(
                "scaler has {} columns, model expects {}",
                meta.scaler.dim(),
                model.behavior.input_dim()
            )));
        }
        Ok(Self { model, scaler: meta.scaler, thresholds: meta.thresholds, tokenizer, config: meta.config })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

pub fn save_checkpoint(bundle: &DetectorBundle, path: &Path) -> Result<()> {
    bundle.save(path)
}

pub fn load_checkpoint(path: &Path) -> Result<DetectorBundle> {
    DetectorBundle::load(path)
}

/// Manifest of a checkpoint without materializing the model.
pub fn checkpoint_manifest(bytes: &[u8]) -> Result<Value> {
    let (meta, tensors) = read_archive(CHECKPOINT_MAGIC, bytes)?;
    let shapes: Vec<Value> = tensors.iter().map(|(n, t)| json!({"name": n, "shape": t.shape()})).collect();
    Ok(json!({"meta": meta, "tensors": shapes}))
}
