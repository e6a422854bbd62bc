//! Synthetic environment: scene generation, the detector port with its mock
//! implementation, and step rewards.

pub mod detector;
pub mod reward;
pub mod scene;
pub mod world;

pub use detector::{DetectorPort, FailingDetector, MockDetector};
pub use reward::{step_reward, uncertainty_reduction, DEFAULT_W_GT};
pub use scene::{gen_scene, random_scenes, SceneSpec};
pub use world::World;
