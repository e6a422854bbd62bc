//! Python bindings: the sampling, training and inference pipeline over
//! files, plus the model and metric primitives. Structured results are
//! returned as plain Python objects (dicts, lists, floats).

use std::path::{Path, PathBuf};

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use vcot_core::actions::{ActionConfig, Lexicon};
use vcot_core::bandit::arms::ucb_bonus as core_ucb_bonus;
use vcot_core::bandit::{Policy, SamplerConfig, StopThresholds};
use vcot_core::env::{random_scenes as core_random_scenes, uncertainty_reduction as core_ur, World};
use vcot_core::eval::{build_worlds, check_unique_ids, Bench};
use vcot_core::io::{load_dataset as core_load_dataset, load_scenes, save_dataset, save_scenes, SceneEntry};
use vcot_core::metrics;
use vcot_core::model::{iou as core_iou, BoundingBox, FEATURE_DIM, NUM_ACTIONS};
use vcot_core::rm::{load_weights, save_weights, train_rm as core_train_rm, InferMode, LossWeights, RmWeights, TrainConfig};

fn py_err(e: vcot_core::Error) -> PyErr {
    if e.is_io() {
        PyOSError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

/// Converts through JSON so nested records arrive as dicts and lists.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn worlds(scenes: &Path, lex: &Lexicon, actions: &ActionConfig, seed: u64) -> PyResult<Vec<World>> {
    let entries = load_scenes(scenes).map_err(py_err)?;
    let worlds = build_worlds(&entries, lex, actions, seed).map_err(py_err)?;
    check_unique_ids(&worlds).map_err(py_err)?;
    Ok(worlds)
}

/// Random scene descriptions (as dicts); written to `out` when given.
#[pyfunction]
#[pyo3(signature = (n, seed=0, out=None))]
fn random_scenes<'py>(py: Python<'py>, n: usize, seed: u64, out: Option<PathBuf>) -> PyResult<Bound<'py, PyAny>> {
    let specs = core_random_scenes(n, seed, &Lexicon::builtin());
    if let Some(path) = out {
        let entries: Vec<SceneEntry> = specs.iter().map(|s| SceneEntry { spec: s.clone(), image: None }).collect();
        save_scenes(&path, &entries).map_err(py_err)?;
    }
    to_py(py, &specs)
}

/// Samples trajectories for every scene in `scenes` and writes the dataset
/// to `out`. Returns a summary dict.
#[pyfunction]
#[pyo3(signature = (scenes, out, policy="ucb", lam=1.0, w_gt=0.5, seed=0))]
fn sample<'py>(
    py: Python<'py>,
    scenes: PathBuf,
    out: PathBuf,
    policy: &str,
    lam: f64,
    w_gt: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let lex = Lexicon::builtin();
    let cfg = SamplerConfig {
        policy: Policy::parse(policy, lam).map_err(py_err)?,
        w_gt,
        ..SamplerConfig::default()
    };
    let worlds = worlds(&scenes, &lex, &cfg.actions, seed)?;
    let bench = Bench {
        worlds: &worlds,
        lexicon: &lex,
        actions: &cfg.actions,
        w_gt,
    };
    let mut records: Vec<_> = py.detach(|| bench.sample(&cfg, seed)).into_iter().map(|r| r.record).collect();
    records.sort_by(|a, b| a.image_id.cmp(&b.image_id));
    save_dataset(&out, &records).map_err(py_err)?;
    let topk: Vec<f64> = records.iter().map(metrics::topk_at_stop).collect();
    let summary = serde_json::json!({
        "images": records.len(),
        "trajectories": records.iter().map(|r| r.budget()).sum::<usize>(),
        "steps": records.iter().map(|r| r.step_count()).sum::<usize>(),
        "topk_mean": metrics::mean(&topk),
    });
    to_py(py, &summary)
}

/// Image records of a dataset file, as dicts.
#[pyfunction]
fn load_dataset<'py>(py: Python<'py>, path: PathBuf) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &core_load_dataset(&path).map_err(py_err)?)
}

/// Trains the reward-policy model on a dataset file and writes the weights
/// to `out`. Returns the per-epoch loss history.
#[pyfunction]
#[pyo3(signature = (data, out, beta=1.0, gamma=0.1, epochs=50, lr=0.05, seed=0))]
#[allow(clippy::too_many_arguments)]
fn train_rm(
    py: Python<'_>,
    data: PathBuf,
    out: PathBuf,
    beta: f64,
    gamma: f64,
    epochs: usize,
    lr: f64,
    seed: u64,
) -> PyResult<Vec<f64>> {
    let records = core_load_dataset(&data).map_err(py_err)?;
    let cfg = TrainConfig {
        loss: LossWeights { beta, gamma },
        epochs,
        lr,
        ..TrainConfig::default()
    };
    let trained = py.detach(|| core_train_rm(&records, &cfg, seed)).map_err(py_err)?;
    save_weights(&trained.weights, &out).map_err(py_err)?;
    Ok(trained.loss_history)
}

/// Model-guided refinement of every scene. `mode` is policy, reward, hybrid
/// or random (no model needed). Returns one trace dict per scene.
#[pyfunction]
#[pyo3(signature = (scenes, rm=None, mode="policy", alpha=None, w_gt=0.5, seed=0))]
fn infer<'py>(
    py: Python<'py>,
    scenes: PathBuf,
    rm: Option<PathBuf>,
    mode: &str,
    alpha: Option<f64>,
    w_gt: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let lex = Lexicon::builtin();
    let actions = ActionConfig::default();
    let thr = StopThresholds::default();
    let worlds = worlds(&scenes, &lex, &actions, seed)?;
    let bench = Bench {
        worlds: &worlds,
        lexicon: &lex,
        actions: &actions,
        w_gt,
    };
    let mut traces = if mode.eq_ignore_ascii_case("random") {
        py.detach(|| bench.infer_random(&thr, seed))
    } else {
        let m = InferMode::parse(mode, alpha).map_err(py_err)?;
        let path = rm.ok_or_else(|| PyValueError::new_err("rm is required unless mode is random"))?;
        let w = load_weights(&path).map_err(py_err)?;
        py.detach(|| bench.infer(&w, m, &thr))
    };
    traces.sort_by(|a, b| a.image_id.cmp(&b.image_id));
    to_py(py, &traces)
}

/// A trained reward-policy model.
#[pyclass(frozen)]
struct RewardModel {
    weights: RmWeights,
}

#[pymethods]
impl RewardModel {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(RewardModel {
            weights: load_weights(&path).map_err(py_err)?,
        })
    }

    /// A model with every parameter zero: uniform policy, reward 0.5.
    #[staticmethod]
    #[pyo3(signature = (hidden=64))]
    fn zeros(hidden: usize) -> Self {
        RewardModel {
            weights: RmWeights::zeros(hidden),
        }
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        save_weights(&self.weights, &path).map_err(py_err)
    }

    #[getter]
    fn hidden(&self) -> usize {
        self.weights.hidden()
    }

    #[getter]
    fn num_params(&self) -> usize {
        self.weights.num_params()
    }

    /// Policy over the seven actions and predicted reward for a 20-dim
    /// weak-unit feature vector.
    fn forward(&self, features: Vec<f64>) -> PyResult<(Vec<f64>, f64)> {
        let z: [f64; FEATURE_DIM] = features
            .try_into()
            .map_err(|v: Vec<f64>| PyValueError::new_err(format!("expected {FEATURE_DIM} features, got {}", v.len())))?;
        let out = self.weights.forward(&z).map_err(py_err)?;
        Ok((out.policy.to_vec(), out.reward))
    }
}

#[pyfunction]
fn topk_mean(mut rewards: Vec<f64>) -> f64 {
    metrics::topk_mean(&mut rewards)
}

#[pyfunction]
fn action_entropy(counts: Vec<u64>) -> PyResult<f64> {
    let c: [u64; NUM_ACTIONS] = counts
        .try_into()
        .map_err(|_| PyValueError::new_err(format!("expected {NUM_ACTIONS} counts")))?;
    Ok(metrics::action_entropy(&c))
}

#[pyfunction]
fn rm_loss_std(history: Vec<f64>) -> f64 {
    metrics::rm_loss_std(&history)
}

#[pyfunction]
fn uncertainty_reduction(before: Vec<f64>, after: Vec<f64>) -> f64 {
    core_ur(&before, &after)
}

#[pyfunction]
fn iou(a: (f64, f64, f64, f64), b: (f64, f64, f64, f64)) -> PyResult<f64> {
    let bx = |t: (f64, f64, f64, f64)| BoundingBox::new(t.0, t.1, t.2, t.3).map_err(py_err);
    Ok(core_iou(&bx(a)?, &bx(b)?))
}

#[pyfunction]
#[pyo3(signature = (t, n, lam=1.0))]
fn ucb_bonus(t: u64, n: u64, lam: f64) -> f64 {
    core_ucb_bonus(t, n, lam)
}

#[pymodule]
fn vcot(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<RewardModel>()?;
    m.add_function(wrap_pyfunction!(random_scenes, m)?)?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add_function(wrap_pyfunction!(load_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(train_rm, m)?)?;
    m.add_function(wrap_pyfunction!(infer, m)?)?;
    m.add_function(wrap_pyfunction!(topk_mean, m)?)?;
    m.add_function(wrap_pyfunction!(action_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(rm_loss_std, m)?)?;
    m.add_function(wrap_pyfunction!(uncertainty_reduction, m)?)?;
    m.add_function(wrap_pyfunction!(iou, m)?)?;
    m.add_function(wrap_pyfunction!(ucb_bonus, m)?)?;
    Ok(())
}
