//! Scene lists: one JSON scene description per line, optionally pointing at
//! a PPM image to use instead of rendering the scene.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::env::SceneSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneEntry {
    #[serde(flatten)]
    pub spec: SceneSpec,
    /// Relative paths resolve against the scene file's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<PathBuf>,
}

pub fn load_scenes(path: &Path) -> Result<Vec<SceneEntry>> {
    let text = super::read_text(path)?;
    let base = path.parent().unwrap_or(Path::new(""));
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            msg,
        };
        let mut entry: SceneEntry = serde_json::from_str(line).map_err(|e| parse_err(e.to_string()))?;
        entry.spec.validate().map_err(|e| parse_err(e.to_string()))?;
        if let Some(img) = entry.image.as_mut() {
            if img.is_relative() {
                *img = base.join(&*img);
            }
        }
        out.push(entry);
    }
    Ok(out)
}

pub fn save_scenes(path: &Path, scenes: &[SceneEntry]) -> Result<()> {
    let mut buf = Vec::new();
    for s in scenes {
        serde_json::to_writer(&mut buf, s).map_err(|e| Error::io(path, e.into()))?;
        buf.push(b'\n');
    }
    super::write_file(path, &buf)
}
