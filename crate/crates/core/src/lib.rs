//! Weak-Markov visual reasoning loop for prompt refinement in open-vocabulary
//! detection: visual operators, a synthetic detector world, bandit trajectory
//! sampling, an offline reward–policy model and RM-guided inference.

pub mod actions;
pub mod bandit;
pub mod env;
pub mod error;
pub mod eval;
pub mod io;
pub mod metrics;
pub mod model;
pub mod raster;
pub mod rm;
pub mod rollout;
pub mod seed;

pub use error::{Error, Result};
