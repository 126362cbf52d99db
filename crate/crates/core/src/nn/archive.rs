//! Binary container: 4-byte magic, u64 LE manifest length, JSON manifest,
//! then every tensor as little-endian f32 in manifest order.

use super::{Parameters, Tensor};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    shape: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    meta: Value,
    tensors: Vec<TensorEntry>,
}

pub fn write_archive(magic: &[u8; 4], meta: &Value, tensors: &[(String, &Tensor<f32>)]) -> Result<Vec<u8>> {
    let manifest = Manifest {
        meta: meta.clone(),
        tensors: tensors.iter().map(|(n, t)| TensorEntry { name: n.clone(), shape: t.shape().to_vec() }).collect(),
    };
    let json = serde_json::to_vec(&manifest)?;
    let payload: usize = tensors.iter().map(|(_, t)| t.len() * 4).sum();
    let mut out = Vec::with_capacity(12 + json.len() + payload);
    out.extend_from_slice(magic);
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    for (_, t) in tensors {
        for v in t.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

/// Manifest metadata plus named tensors in file order.
pub type Archive = (Value, Vec<(String, Tensor<f32>)>);

pub fn read_archive(magic: &[u8; 4], bytes: &[u8]) -> Result<Archive> {
    if bytes.len() < 12 || &bytes[..4] != magic {
        return Err(Error::Checkpoint("bad magic header".into()));
    }
    let len = u64::from_le_bytes(bytes[4..12].try_into().expect("8 bytes")) as usize;
    let body = bytes.get(12..12 + len).ok_or_else(|| Error::Checkpoint("truncated manifest".into()))?;
    let manifest: Manifest =
        serde_json::from_slice(body).map_err(|e| Error::Checkpoint(format!("manifest: {e}")))?;
    let mut offset = 12 + len;
    let mut tensors = Vec::with_capacity(manifest.tensors.len());
    for entry in manifest.tensors {
        let n: usize = entry.shape.iter().product();
        let raw = bytes
            .get(offset..offset + 4 * n)
            .ok_or_else(|| Error::Checkpoint(format!("tensor {} truncated", entry.name)))?;
        let data = raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes"))).collect();
        offset += 4 * n;
        tensors.push((entry.name, Tensor::from_vec(&entry.shape, data)));
    }
    if offset != bytes.len() {
        return Err(Error::Checkpoint(format!("{} trailing bytes after last tensor", bytes.len() - offset)));
    }
    Ok((manifest.meta, tensors))
}

/// Copies archived tensors into `model` by name, checking shapes.
pub fn restore_params<M: Parameters<f32>>(model: &mut M, src: &mut Vec<(String, Tensor<f32>)>) -> Result<()> {
    let names: Vec<String> = model.params().into_iter().map(|(n, _)| n).collect();
    for (name, slot) in names.into_iter().zip(model.params_mut()) {
        let pos = src
            .iter()
            .position(|(n, _)| *n == name)
            .ok_or_else(|| Error::Checkpoint(format!("tensor {name} missing")))?;
        let (_, t) = src.swap_remove(pos);
        if t.shape() != slot.shape() {
            return Err(Error::Checkpoint(format!("tensor {name} has shape {:?}, expected {:?}", t.shape(), slot.shape())));
        }
        *slot = t;
    }
    Ok(())
}
