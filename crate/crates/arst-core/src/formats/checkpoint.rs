//! Model checkpoints.
//!
//! Layout (integers and floats little-endian): 6-byte magic `ARSTM1`,
//! `u32` tensor count, then per tensor a `u16` name length, the UTF-8
//! name, a `u8` rank (1 for single-row tensors such as biases and norm
//! affines, 2 for matrices), `rank` `u32` dimensions, and the 32-bit float
//! payload. A JSON trailer holding the producing run configuration
//! follows the last tensor.

use std::path::Path;

use crate::error::{ArstError, Result};
use crate::formats::run_config::RunConfig;
use crate::model::ModelParams;
use crate::numerics::{Matrix, Parameterized, SeededRng};

pub const CHECKPOINT_MAGIC: &[u8; 6] = b"ARSTM1";

fn format_err(path: &Path, reason: impl Into<String>) -> ArstError {
    ArstError::Format {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

/// Writes parameters and their producing configuration.
pub fn save_checkpoint(path: &Path, params: &ModelParams<f32>, config: &RunConfig) -> Result<()> {
    let tensors = params.parameters();
    let mut buf = Vec::new();
    buf.extend_from_slice(CHECKPOINT_MAGIC);
    buf.extend_from_slice(&(tensors.len() as u32).to_le_bytes());
    for p in tensors {
        let name = p.name.as_bytes();
        if name.len() > u16::MAX as usize {
            return Err(format_err(path, format!("tensor name too long: {}", p.name)));
        }
        buf.extend_from_slice(&(name.len() as u16).to_le_bytes());
        buf.extend_from_slice(name);
        let (rows, cols) = p.value.shape();
        if rows == 1 {
            buf.push(1u8);
            buf.extend_from_slice(&(cols as u32).to_le_bytes());
        } else {
            buf.push(2u8);
            buf.extend_from_slice(&(rows as u32).to_le_bytes());
            buf.extend_from_slice(&(cols as u32).to_le_bytes());
        }
        for &v in p.value.data() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    let trailer = serde_json::to_vec(config)
        .map_err(|e| format_err(path, format!("cannot serialize config trailer: {e}")))?;
    buf.extend_from_slice(&trailer);
    std::fs::write(path, buf).map_err(|e| format_err(path, format!("cannot write: {e}")))
}

struct Cursor<'a> {
    bytes: &'a [u8],
    at: usize,
    path: &'a Path,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.at + n > self.bytes.len() {
            return Err(format_err(
                self.path,
                format!(
                    "truncated: wanted {n} bytes at offset {}, file has {}",
                    self.at,
                    self.bytes.len()
                ),
            ));
        }
        let slice = &self.bytes[self.at..self.at + n];
        self.at += n;
        Ok(slice)
    }

    fn u16_le(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32_le(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
}

/// Loads a checkpoint, reconstructing parameters in canonical order and
/// validating completeness and shapes against the trailer configuration.
pub fn load_checkpoint(path: &Path) -> Result<(ModelParams<f32>, RunConfig)> {
    let bytes =
        std::fs::read(path).map_err(|e| format_err(path, format!("cannot read: {e}")))?;
    let mut cur = Cursor {
        bytes: &bytes,
        at: 0,
        path,
    };
    if cur.take(6)? != CHECKPOINT_MAGIC {
        return Err(format_err(path, "bad magic: not a checkpoint"));
    }
    let count = cur.u32_le()? as usize;
    let mut loaded: std::collections::BTreeMap<String, Matrix<f32>> =
        std::collections::BTreeMap::new();
    for _ in 0..count {
        let name_len = cur.u16_le()? as usize;
        let name = std::str::from_utf8(cur.take(name_len)?)
            .map_err(|_| format_err(path, "tensor name is not UTF-8"))?
            .to_string();
        let rank = cur.u8()?;
        let (rows, cols) = match rank {
            1 => (1usize, cur.u32_le()? as usize),
            2 => {
                let r = cur.u32_le()? as usize;
                let c = cur.u32_le()? as usize;
                (r, c)
            }
            other => {
                return Err(format_err(
                    path,
                    format!("tensor {name} has unsupported rank {other}"),
                ))
            }
        };
        let n = rows
            .checked_mul(cols)
            .filter(|&n| n > 0 && n < (1 << 31))
            .ok_or_else(|| format_err(path, format!("tensor {name} has invalid shape")))?;
        let mut data = Vec::with_capacity(n);
        for chunk in cur.take(4 * n)?.chunks_exact(4) {
            data.push(f32::from_le_bytes(chunk.try_into().unwrap()));
        }
        if loaded.insert(name.clone(), Matrix::from_vec(rows, cols, data)?).is_some() {
            return Err(format_err(path, format!("duplicate tensor {name}")));
        }
    }
    let trailer = &bytes[cur.at..];
    let config: RunConfig = serde_json::from_slice(trailer)
        .map_err(|e| format_err(path, format!("bad config trailer: {e}")))?;
    config.validate()?;

    // Materialize parameters in canonical order from the loaded map.
    let mut params = ModelParams::<f32>::init(&config.model, &mut SeededRng::new(0))?;
    let mut used = 0usize;
    for p in params.parameters_mut() {
        let tensor = loaded.get(&p.name).ok_or_else(|| {
            format_err(path, format!("missing tensor {}", p.name))
        })?;
        if tensor.shape() != p.value.shape() {
            return Err(format_err(
                path,
                format!(
                    "tensor {} has shape {:?}, config implies {:?}",
                    p.name,
                    tensor.shape(),
                    p.value.shape()
                ),
            ));
        }
        p.value.data_mut().copy_from_slice(tensor.data());
        used += 1;
    }
    if used != loaded.len() {
        let expected: std::collections::BTreeSet<String> =
            params.parameters().iter().map(|p| p.name.clone()).collect();
        let extra: Vec<String> = loaded
            .keys()
            .filter(|k| !expected.contains(*k))
            .cloned()
            .collect();
        return Err(format_err(
            path,
            format!("unexpected tensors in file: {}", extra.join(", ")),
        ));
    }
    params.validate_shapes(&config.model)?;
    Ok((params, config))
}
