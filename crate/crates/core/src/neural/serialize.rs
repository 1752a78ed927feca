//! Model directory format: `manifest.json` describing every tensor plus
//! `weights.bin`, the concatenated little-endian `f32` arrays in manifest
//! order.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::param::ParamStore;
use super::tensor::{Scalar, Tensor};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const WEIGHTS_FILE: &str = "weights.bin";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorRecord {
    pub name: String,
    pub shape: Vec<usize>,
    pub dtype: String,
    pub offset: u64,
    pub length: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub kind: String,
    pub hyperparameters: serde_json::Value,
    pub vocabulary: Vec<String>,
    #[serde(default)]
    pub metadata: serde_json::Map<String, serde_json::Value>,
    pub tensors: Vec<TensorRecord>,
}

impl Manifest {
    pub fn new(kind: &str, hyperparameters: serde_json::Value, vocabulary: Vec<String>) -> Self {
        Manifest {
            format_version: FORMAT_VERSION,
            kind: kind.to_string(),
            hyperparameters,
            vocabulary,
            metadata: Default::default(),
            tensors: Vec::new(),
        }
    }
}

/// Write `store` into `dir`, filling `manifest.tensors`.
pub fn save_model<T: Scalar>(dir: &Path, mut manifest: Manifest, store: &ParamStore<T>) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut bytes = Vec::with_capacity(store.num_values() * 4);
    manifest.tensors.clear();
    for (_, p) in store.iter() {
        let offset = bytes.len() as u64;
        for &v in p.value.data() {
            bytes.extend_from_slice(&(v.as_f64() as f32).to_le_bytes());
        }
        manifest.tensors.push(TensorRecord {
            name: p.name.clone(),
            shape: p.value.shape().to_vec(),
            dtype: "f32".into(),
            offset,
            length: bytes.len() as u64 - offset,
        });
    }
    let weights = dir.join(WEIGHTS_FILE);
    fs::write(&weights, &bytes).map_err(|e| Error::io(&weights, e))?;
    let path = dir.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(&manifest)?;
    fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    Ok(())
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: Manifest = serde_json::from_str(&text)?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported format version {}",
            manifest.format_version
        )));
    }
    Ok(manifest)
}

/// Overwrite every parameter of `store` from `dir`. Names and shapes must
/// match the manifest exactly.
pub fn load_weights<T: Scalar>(dir: &Path, manifest: &Manifest, store: &mut ParamStore<T>) -> Result<()> {
    let path = dir.join(WEIGHTS_FILE);
    let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
    if manifest.tensors.len() != store.len() {
        return Err(Error::Format(format!(
            "manifest lists {} tensors, model expects {}",
            manifest.tensors.len(),
            store.len()
        )));
    }
    for rec in &manifest.tensors {
        if rec.dtype != "f32" {
            return Err(Error::Format(format!("tensor {}: unsupported dtype {}", rec.name, rec.dtype)));
        }
        let id = store
            .find(&rec.name)
            .ok_or_else(|| Error::Format(format!("unknown tensor {}", rec.name)))?;
        let n: usize = rec.shape.iter().product();
        let (start, end) = (rec.offset as usize, (rec.offset + rec.length) as usize);
        if rec.length as usize != n * 4 || end > bytes.len() {
            return Err(Error::Format(format!("tensor {} has a bad byte range", rec.name)));
        }
        let data = bytes[start..end]
            .chunks_exact(4)
            .map(|c| T::from_f64(f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64))
            .collect();
        store.set_value(id, Tensor::from_vec(&rec.shape, data)?)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_are_contiguous_le_f32() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = ParamStore::<f32>::new();
        store.add("a", Tensor::from_vec(&[2], vec![1.0, -2.5]).unwrap());
        store.add("b", Tensor::from_vec(&[1, 1], vec![0.25]).unwrap());
        save_model(dir.path(), Manifest::new("test", serde_json::json!({}), vec![]), &store).unwrap();
        let bytes = fs::read(dir.path().join(WEIGHTS_FILE)).unwrap();
        assert_eq!(bytes.len(), 12);
        assert_eq!(&bytes[4..8], &(-2.5f32).to_le_bytes());
        let m = read_manifest(dir.path()).unwrap();
        assert_eq!(m.tensors[1].offset, 8);
        assert_eq!(m.tensors[1].length, 4);

        let mut fresh = ParamStore::<f32>::new();
        fresh.add("a", Tensor::zeros(&[2]));
        fresh.add("b", Tensor::zeros(&[1, 1]));
        load_weights(dir.path(), &m, &mut fresh).unwrap();
        assert_eq!(fresh.value(super::super::ParamId(0)).data(), &[1.0, -2.5]);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = ParamStore::<f32>::new();
        store.add("a", Tensor::zeros(&[2]));
        save_model(dir.path(), Manifest::new("test", serde_json::json!({}), vec![]), &store).unwrap();
        let m = read_manifest(dir.path()).unwrap();
        let mut other = ParamStore::<f32>::new();
        other.add("a", Tensor::zeros(&[3]));
        assert!(load_weights(dir.path(), &m, &mut other).is_err());
    }
}
