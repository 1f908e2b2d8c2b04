//! Binary checkpoint: `"RTCN"`, format version (u32 LE), header JSON length
//! (u64 LE) and bytes, parameter count (u64 LE), then every parameter as
//! little-endian `f32` in declaration order.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sma_core::model::{ResTcnConfig, ResTcnModel, TrainingMeta};

use crate::error::{Result, SmaError};

pub const MAGIC: &[u8; 4] = b"RTCN";
pub const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    config: ResTcnConfig,
    training: TrainingMeta,
}

pub fn encode(model: &ResTcnModel<f32>) -> Vec<u8> {
    let header = Header {
        config: model.config.clone(),
        training: model.meta.clone(),
    };
    let json = serde_json::to_vec(&header).expect("header serializes");
    let params = model.parameters();
    let count: usize = params.iter().map(|p| p.len()).sum();
    let mut out = Vec::with_capacity(4 + 4 + 8 + json.len() + 8 + 4 * count);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    out.extend_from_slice(&(count as u64).to_le_bytes());
    for p in params {
        out.extend(p.iter().flat_map(|v| v.to_le_bytes()));
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| SmaError::Corruption(format!("checkpoint truncated while reading {what}")))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().expect("8 bytes")))
    }
}

pub fn decode(bytes: &[u8]) -> Result<ResTcnModel<f32>> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4, "magic")? != MAGIC {
        return Err(SmaError::Corruption("not a checkpoint (bad magic)".into()));
    }
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(SmaError::Version {
            found: version,
            expected: VERSION,
        });
    }
    let json_len =
        usize::try_from(r.u64("header length")?).map_err(|_| SmaError::Corruption("header length overflows".into()))?;
    let header: Header = serde_json::from_slice(r.take(json_len, "header")?)
        .map_err(|e| SmaError::Corruption(format!("checkpoint header: {e}")))?;
    let mut model = ResTcnModel::<f32>::build(header.config)?;
    model.meta = header.training;
    let count = r.u64("parameter count")?;
    let expected = model.parameter_count() as u64;
    if count != expected {
        return Err(SmaError::Corruption(format!(
            "{count} parameters stored, config implies {expected}"
        )));
    }
    for p in model.parameters_mut() {
        let raw = r.take(4 * p.len(), "parameters")?;
        for (v, b) in p.iter_mut().zip(raw.chunks_exact(4)) {
            *v = f32::from_le_bytes([b[0], b[1], b[2], b[3]]);
        }
    }
    if r.pos != bytes.len() {
        return Err(SmaError::Corruption(format!(
            "{} trailing bytes after parameters",
            bytes.len() - r.pos
        )));
    }
    Ok(model)
}

/// Creates missing parent directories.
pub fn save(model: &ResTcnModel<f32>, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(SmaError::io(dir))?;
    }
    fs::write(path, encode(model)).map_err(SmaError::io(path))
}

pub fn load(path: &Path) -> Result<ResTcnModel<f32>> {
    decode(&fs::read(path).map_err(SmaError::io(path))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> ResTcnModel<f32> {
        ResTcnModel::build(ResTcnConfig {
            in_channels: 3,
            ..ResTcnConfig::new(3, 4)
        })
        .unwrap()
    }

    #[test]
    fn reencoding_is_byte_identical() {
        let bytes = encode(&model());
        assert_eq!(encode(&decode(&bytes).unwrap()), bytes);
        assert_eq!(&bytes[..4], b"RTCN");
    }

    #[test]
    fn truncation_is_corruption() {
        let bytes = encode(&model());
        for cut in [0, 3, 10, 40, bytes.len() - 1] {
            assert!(
                matches!(decode(&bytes[..cut]), Err(SmaError::Corruption(_))),
                "cut {cut}"
            );
        }
    }

    #[test]
    fn version_mismatch() {
        let mut bytes = encode(&model());
        bytes[4..8].copy_from_slice(&7u32.to_le_bytes());
        assert!(matches!(decode(&bytes), Err(SmaError::Version { found: 7, .. })));
    }

    #[test]
    fn trailing_bytes_rejected() {
        let mut bytes = encode(&model());
        bytes.push(0);
        assert!(matches!(decode(&bytes), Err(SmaError::Corruption(_))));
    }
}
