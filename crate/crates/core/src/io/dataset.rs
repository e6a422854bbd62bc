//! Line-delimited JSON trajectory dataset, one image record per line.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    ActionId, ImageRecord, StateId, StepDiagnostics, Trajectory, TrajectoryStep, TransitionMatrix, WeakUnit,
    FEATURE_DIM,
};

pub const DATASET_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct StepLine {
    state_from: StateId,
    action: ActionId,
    state_to: StateId,
    features_from: [f64; FEATURE_DIM],
    features_to: [f64; FEATURE_DIM],
    reward: f64,
    #[serde(default)]
    diagnostics: StepDiagnostics,
}

#[derive(Serialize, Deserialize)]
struct RecordLine {
    version: u32,
    image_id: String,
    trajectories: Vec<Vec<StepLine>>,
    /// One flag per trajectory; absent means none aborted.
    #[serde(default)]
    aborted: Vec<bool>,
    posterior: TransitionMatrix,
}

#[derive(Deserialize)]
struct VersionProbe {
    version: Option<u32>,
}

impl From<&ImageRecord> for RecordLine {
    fn from(r: &ImageRecord) -> Self {
        RecordLine {
            version: DATASET_VERSION,
            image_id: r.image_id.clone(),
            trajectories: r
                .trajectories
                .iter()
                .map(|t| {
                    t.steps
                        .iter()
                        .map(|s| StepLine {
                            state_from: s.z_from.state,
                            action: s.action,
                            state_to: s.z_to.state,
                            features_from: s.z_from.features,
                            features_to: s.z_to.features,
                            reward: s.reward,
                            diagnostics: s.diagnostics,
                        })
                        .collect()
                })
                .collect(),
            aborted: r.trajectories.iter().map(|t| t.aborted).collect(),
            posterior: r.transition_posterior,
        }
    }
}

impl RecordLine {
    fn into_record(self) -> Result<ImageRecord> {
        if !self.aborted.is_empty() && self.aborted.len() != self.trajectories.len() {
            return Err(Error::validation("aborted flags do not match the trajectory count"));
        }
        let trajectories = self
            .trajectories
            .into_iter()
            .enumerate()
            .map(|(i, steps)| Trajectory {
                steps: steps
                    .into_iter()
                    .map(|s| TrajectoryStep {
                        z_from: WeakUnit {
                            state: s.state_from,
                            features: s.features_from,
                        },
                        action: s.action,
                        z_to: WeakUnit {
                            state: s.state_to,
                            features: s.features_to,
                        },
                        reward: s.reward,
                        diagnostics: s.diagnostics,
                    })
                    .collect(),
                aborted: self.aborted.get(i).copied().unwrap_or(false),
            })
            .collect();
        let record = ImageRecord {
            image_id: self.image_id,
            trajectories,
            transition_posterior: self.posterior,
        };
        record.validate()?;
        Ok(record)
    }
}

pub fn write_dataset<W: Write>(mut out: W, records: &[ImageRecord]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, &RecordLine::from(r))?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Parses a dataset; `origin` only labels errors. Blank lines are skipped
/// and line numbers in errors are 1-based.
pub fn read_dataset<R: BufRead>(input: R, origin: &Path) -> Result<Vec<ImageRecord>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |msg: String| Error::Parse {
            path: origin.to_path_buf(),
            line: i + 1,
            msg,
        };
        let probe: VersionProbe = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        match probe.version {
            Some(DATASET_VERSION) => {}
            Some(found) => {
                return Err(Error::Version {
                    found,
                    supported: DATASET_VERSION,
                })
            }
            None => return Err(parse_err("missing version field".into())),
        }
        let rec: RecordLine = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        out.push(rec.into_record().map_err(|e| parse_err(e.to_string()))?);
    }
    Ok(out)
}

pub fn save_dataset(path: &Path, records: &[ImageRecord]) -> Result<()> {
    let mut buf = Vec::new();
    write_dataset(&mut buf, records).map_err(|e| Error::io(path, e))?;
    super::write_file(path, &buf)
}

pub fn load_dataset(path: &Path) -> Result<Vec<ImageRecord>> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(std::io::BufReader::new(f), path)
}
