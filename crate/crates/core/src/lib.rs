//! Legged-locomotion environment kit.
//!
//! Four robot morphologies, a ten-term gait-compliance reward, CPG expert
//! demonstrators and a rollout harness that records prior-data buffers and
//! evaluation statistics.

pub mod cpg;
pub mod dynamics;
pub mod env;
pub mod error;
pub mod harness;
pub mod model;
pub mod reward;

pub use dynamics::{ContactState, Dynamics, SimState};
pub use env::{Env, ObsLayout, Observation, StepInfo, StepResult};
pub use error::{Error, Result};
pub use model::{load_morphology, MorphologySpec};
pub use reward::{GaitClock, RewardBreakdown};
