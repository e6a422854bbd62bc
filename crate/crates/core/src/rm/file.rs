//! Binary weight file: `OVRM`, format version, dims, then every tensor as
//! little-endian `f32` in layer order (weights row-major, then biases).

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{FEATURE_DIM, NUM_ACTIONS};

use super::net::{Layout, RmWeights};

pub const MAGIC: &[u8; 4] = b"OVRM";
pub const FORMAT_VERSION: u32 = 1;

pub fn encode_weights(w: &RmWeights) -> Vec<u8> {
    let mut out = Vec::with_capacity(20 + 4 * w.num_params());
    out.extend_from_slice(MAGIC);
    for v in [FORMAT_VERSION, FEATURE_DIM as u32, w.hidden() as u32, NUM_ACTIONS as u32] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for p in w.params() {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

pub fn decode_weights(bytes: &[u8]) -> Result<RmWeights> {
    let mut r = bytes;
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| Error::UnsupportedFormat("weight file shorter than its header".into()))?;
    if &magic != MAGIC {
        return Err(Error::UnsupportedFormat(format!("bad weight-file magic {magic:?}")));
    }
    let mut word = || -> Result<u32> {
        let mut b = [0u8; 4];
        r.read_exact(&mut b)
            .map_err(|_| Error::UnsupportedFormat("truncated weight-file header".into()))?;
        Ok(u32::from_le_bytes(b))
    };
    let version = word()?;
    if version != FORMAT_VERSION {
        return Err(Error::Version {
            found: version,
            supported: FORMAT_VERSION,
        });
    }
    let (input, hidden, actions) = (word()? as usize, word()? as usize, word()? as usize);
    if input != FEATURE_DIM || actions != NUM_ACTIONS || hidden == 0 {
        return Err(Error::validation(format!(
            "weight file dims {input}/{hidden}/{actions} do not fit a {FEATURE_DIM}-feature, {NUM_ACTIONS}-action model"
        )));
    }
    let body = &bytes[20..];
    let want = Layout::new(hidden).len;
    if body.len() != 4 * want {
        return Err(Error::validation(format!(
            "weight file holds {} bytes of parameters, expected {}",
            body.len(),
            4 * want
        )));
    }
    let params = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    RmWeights::from_params(hidden, params)
}

pub fn save_weights(w: &RmWeights, path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&encode_weights(w)).map_err(|e| Error::io(path, e))
}

pub fn load_weights(path: &Path) -> Result<RmWeights> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_weights(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let w = RmWeights::from_params(2, (0..Layout::new(2).len).map(|i| i as f32 * 0.5).collect()).unwrap();
        let bytes = encode_weights(&w);
        assert_eq!(&bytes[..4], b"OVRM");
        assert_eq!(bytes[4..8], 1u32.to_le_bytes());
        assert_eq!(bytes[8..12], 20u32.to_le_bytes());
        assert_eq!(bytes[12..16], 2u32.to_le_bytes());
        assert_eq!(bytes[16..20], 7u32.to_le_bytes());
        // first layer-1 weight, then the second
        assert_eq!(bytes[20..24], 0.0f32.to_le_bytes());
        assert_eq!(bytes[24..28], 0.5f32.to_le_bytes());
        assert_eq!(decode_weights(&bytes).unwrap(), w);
    }

    #[test]
    fn corrupt_files_rejected() {
        let w = RmWeights::zeros(3);
        let mut bytes = encode_weights(&w);
        assert!(decode_weights(&bytes[..bytes.len() - 1]).is_err());
        bytes[4] = 9;
        assert!(matches!(decode_weights(&bytes), Err(Error::Version { found: 9, .. })));
        assert!(matches!(decode_weights(b"\x89PNG\r\n"), Err(Error::UnsupportedFormat(_))));
    }
}
