//! Gym-style environments: `reset`, `step`, `is_game_over`.

pub mod chain;
pub mod lane;

use std::sync::Arc;

use thiserror::Error;

use crate::sim::TrackError;
use crate::vision::VisionError;

pub use chain::ChainEnv;
pub use lane::{decode_action, EnvConfig, LaneEnv, ObservationMode, ACTION_STEERING, ACTION_THROTTLE};

/// An 8-bit observation tensor in `(h, w, c)` order. Cloning is cheap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observation {
    pub shape: [usize; 3],
    pub data: Arc<[u8]>,
}

impl Observation {
    pub fn new(shape: [usize; 3], data: Vec<u8>) -> Self {
        debug_assert_eq!(shape.iter().product::<usize>(), data.len());
        Self { shape, data: data.into() }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepInfo {
    /// Signed cross-track error, metres.
    pub cte: f64,
    pub arclength_s: f64,
    /// Net arclength driven since reset; negative when going backwards.
    pub lap_progress_total: f64,
    pub laps: u32,
    /// Physics steps since reset.
    pub sim_steps: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

#[derive(Debug, Error, PartialEq)]
pub enum EnvError {
    #[error("step called before reset")]
    NotReset,
    #[error("step called after the episode ended")]
    EpisodeDone,
    #[error("action {action} out of range for {count} actions")]
    InvalidAction { action: usize, count: usize },
    #[error("invalid environment config: {0}")]
    Config(String),
    #[error("remote environment: {0}")]
    Remote(String),
    #[error(transparent)]
    Track(#[from] TrackError),
    #[error(transparent)]
    Vision(#[from] VisionError),
}

pub trait Environment {
    fn action_count(&self) -> usize;
    fn observation_shape(&self) -> [usize; 3];
    /// Start a new episode. `Some(seed)` reseeds the environment's RNG first.
    fn reset(&mut self, seed: Option<u64>) -> Result<Observation, EnvError>;
    fn step(&mut self, action: usize) -> Result<StepResult, EnvError>;
    /// True before the first reset and after a terminal step.
    fn is_game_over(&self) -> bool;
    /// Diagnostics for the current state.
    fn info(&self) -> StepInfo;
}
