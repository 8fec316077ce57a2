//! Self-describing container for model weights.
//!
//! Layout: the 8-byte magic `PSTENSOR`, a little-endian `u32` header length,
//! a UTF-8 JSON header, then every tensor as little-endian `f32` values in
//! header order.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

const MAGIC: &[u8; 8] = b"PSTENSOR";

#[derive(Debug, Error)]
pub enum TensorFileError {
    #[error("not a tensor file (bad magic)")]
    BadMagic,
    #[error("tensor file truncated")]
    Truncated,
    #[error("invalid header: {0}")]
    Header(String),
    #[error("expected a `{expected}` model, found `{found}`")]
    WrongKind { expected: String, found: String },
    #[error("missing tensor `{0}`")]
    MissingTensor(String),
    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorSpec {
    pub name: String,
    pub shape: Vec<usize>,
}

impl TensorSpec {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    kind: String,
    architecture: Value,
    metadata: Value,
    tensors: Vec<TensorSpec>,
}

/// A decoded container: free-form architecture and metadata plus named tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorFile {
    pub kind: String,
    pub architecture: Value,
    pub metadata: Value,
    pub tensors: Vec<(TensorSpec, Vec<f32>)>,
}

impl TensorFile {
    pub fn new(kind: &str, architecture: Value, metadata: Value) -> Self {
        Self {
            kind: kind.to_string(),
            architecture,
            metadata,
            tensors: Vec::new(),
        }
    }

    pub fn push(&mut self, name: &str, shape: Vec<usize>, data: Vec<f32>) {
        debug_assert_eq!(shape.iter().product::<usize>(), data.len());
        self.tensors.push((TensorSpec { name: name.to_string(), shape }, data));
    }

    pub fn tensor(&self, name: &str) -> Result<&(TensorSpec, Vec<f32>), TensorFileError> {
        self.tensors
            .iter()
            .find(|(s, _)| s.name == name)
            .ok_or_else(|| TensorFileError::MissingTensor(name.to_string()))
    }

    pub fn expect_kind(&self, kind: &str) -> Result<(), TensorFileError> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(TensorFileError::WrongKind {
                expected: kind.to_string(),
                found: self.kind.clone(),
            })
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let header = Header {
            kind: self.kind.clone(),
            architecture: self.architecture.clone(),
            metadata: self.metadata.clone(),
            tensors: self.tensors.iter().map(|(s, _)| s.clone()).collect(),
        };
        let header = serde_json::to_vec(&header).expect("header serializes");
        let mut out = Vec::with_capacity(12 + header.len() + 4 * self.tensors.iter().map(|t| t.1.len()).sum::<usize>());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(header.len() as u32).to_le_bytes());
        out.extend_from_slice(&header);
        for (_, data) in &self.tensors {
            for v in data {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, TensorFileError> {
        if bytes.len() < 12 {
            return Err(if bytes.starts_with(&MAGIC[..bytes.len().min(8)]) {
                TensorFileError::Truncated
            } else {
                TensorFileError::BadMagic
            });
        }
        if &bytes[..8] != MAGIC {
            return Err(TensorFileError::BadMagic);
        }
        let hlen = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let body = &bytes[12..];
        if body.len() < hlen {
            return Err(TensorFileError::Truncated);
        }
        let header: Header =
            serde_json::from_slice(&body[..hlen]).map_err(|e| TensorFileError::Header(e.to_string()))?;
        let mut data = &body[hlen..];
        let mut tensors = Vec::with_capacity(header.tensors.len());
        for spec in header.tensors {
            let n = spec.len();
            if data.len() < 4 * n {
                return Err(TensorFileError::Truncated);
            }
            let values = data[..4 * n]
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                .collect();
            data = &data[4 * n..];
            tensors.push((spec, values));
        }
        if !data.is_empty() {
            return Err(TensorFileError::Header("trailing bytes after tensor data".into()));
        }
        Ok(Self {
            kind: header.kind,
            architecture: header.architecture,
            metadata: header.metadata,
            tensors,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), TensorFileError> {
        fs::write(path, self.to_bytes()).map_err(|e| TensorFileError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, TensorFileError> {
        let bytes = fs::read(path).map_err(|e| TensorFileError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_bytes(&bytes)
    }
}
