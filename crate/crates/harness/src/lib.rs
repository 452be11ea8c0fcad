//! Deterministic desk-scale harness for the visual-tactile grasping
//! pipeline: synthetic tactile streams, a simulated pickup episode, and the
//! experiment reproductions behind the acceptance suite.

pub mod episode;
pub mod experiments;
pub mod scenario;
pub mod scripted;
pub mod stream;

pub use episode::{run_batch, run_episode, write_run_dir, EpisodeArtifacts};
pub use scenario::ScenarioConfig;
