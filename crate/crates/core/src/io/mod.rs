//! File formats: the trajectory dataset, scene lists, PPM images and
//! key=value configuration files.

pub mod config;
pub mod dataset;
pub mod ppm;
pub mod scenes;

pub use config::Config;
pub use dataset::{load_dataset, read_dataset, save_dataset, write_dataset, DATASET_VERSION};
pub use ppm::{decode_ppm, encode_p3, encode_p6, load_ppm, save_ppm};
pub use scenes::{load_scenes, save_scenes, SceneEntry};

use std::path::Path;

use crate::error::{Error, Result};

/// Writes `bytes` to `path`, creating parent directories.
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}
