//! Reward–policy model: a small dual-head network trained offline on bandit
//! trajectories and used to replace the bandit at inference time.

pub mod file;
pub mod infer;
pub mod net;
pub mod train;

pub use file::{load_weights, save_weights};
pub use infer::{infer_select, run_inference, trace_episode, InferMode, InferenceTrace, RandomChooser};
pub use net::{rm_grad, rm_loss, LossParts, LossWeights, RmOutput, RmWeights, Sample};
pub use train::{samples_from_records, train_rm, train_samples, TrainConfig, TrainOutput};
