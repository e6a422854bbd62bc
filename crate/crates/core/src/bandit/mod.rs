//! Bandit exploration over the visual operators.

pub mod arms;
pub mod dirichlet;
pub mod sampler;
pub mod stop;

pub use arms::{ucb_select, ArmStats, Policy};
pub use dirichlet::DirichletCounts;
pub use sampler::{sample_image, sample_image_detailed, SampleRun, SamplerConfig};
pub use stop::{frobenius_delta, image_stop, traj_stop, ImageStop, StopThresholds, TrajStop};
