use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EnvError, Environment, Observation, StepInfo, StepResult};
use crate::sim::reward::reward_for_cte;
use crate::sim::{
    cross_track_error, lap_progress, load_track, render_camera, step_kinematics, CameraModel, CarParams, CarState,
    Control, Track, DEFAULT_MAX_EPISODE_STEPS,
};
use crate::vision::{resize_area, resize_bilinear, segment_lanes, Frame, LanePair, ObservationStack, SegmentParams};

/// Steering command per action index.
pub const ACTION_STEERING: [f64; 5] = [-0.8, -0.4, 0.0, 0.4, 0.8];
pub const ACTION_THROTTLE: f64 = 0.35;

/// Half-range of the heading jitter applied on reset, radians.
const RESET_HEADING_JITTER: f64 = 0.1;

pub fn decode_action(index: usize) -> Result<Control, EnvError> {
    ACTION_STEERING
        .get(index)
        .map(|&s| Control::new(s, ACTION_THROTTLE))
        .ok_or(EnvError::InvalidAction { action: index, count: ACTION_STEERING.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservationMode {
    /// Camera frame scaled to 80×80.
    Raw,
    /// Lane lines found by Canny + Hough, redrawn on an 80×80 black canvas.
    Segmented,
    /// Camera frame box-filtered to 20×20.
    Lowres,
}

impl ObservationMode {
    pub fn frame_size(self) -> (usize, usize) {
        match self {
            Self::Raw | Self::Segmented => (80, 80),
            Self::Lowres => (20, 20),
        }
    }
}

impl FromStr for ObservationMode {
    type Err = EnvError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "raw" => Ok(Self::Raw),
            "segmented" => Ok(Self::Segmented),
            "lowres" => Ok(Self::Lowres),
            other => Err(EnvError::Config(format!("unknown observation mode {other:?}"))),
        }
    }
}

impl fmt::Display for ObservationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Raw => "raw",
            Self::Segmented => "segmented",
            Self::Lowres => "lowres",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvConfig {
    /// Built-in track name or path to a track file.
    pub track: String,
    pub observation_mode: ObservationMode,
    pub frame_skip: u32,
    pub seed: u64,
    pub max_episode_steps: u32,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            track: "oval".into(),
            observation_mode: ObservationMode::Raw,
            frame_skip: 2,
            seed: 0,
            max_episode_steps: DEFAULT_MAX_EPISODE_STEPS,
        }
    }
}

/// The car on a track, seen through its front camera.
#[derive(Debug, Clone)]
pub struct LaneEnv {
    config: EnvConfig,
    track: Track,
    car: CarParams,
    camera: CameraModel,
    segment: SegmentParams,
    rng: ChaCha8Rng,
    stack: ObservationStack,
    state: CarState,
    ready: bool,
    done: bool,
    steps: u32,
    info: StepInfo,
    lanes: Option<LanePair>,
}

impl LaneEnv {
    pub fn new(config: EnvConfig) -> Result<Self, EnvError> {
        let track = load_track(&config.track)?;
        Self::with_track(config, track)
    }

    pub fn with_track(config: EnvConfig, track: Track) -> Result<Self, EnvError> {
        if config.frame_skip == 0 {
            return Err(EnvError::Config("frame_skip must be at least 1".into()));
        }
        if config.max_episode_steps == 0 {
            return Err(EnvError::Config("max_episode_steps must be at least 1".into()));
        }
        let (w, h) = config.observation_mode.frame_size();
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            track,
            car: CarParams::default(),
            camera: CameraModel::default(),
            segment: SegmentParams::default(),
            stack: ObservationStack::new(w, h),
            state: CarState { x: 0.0, y: 0.0, heading: 0.0, speed: 0.0 },
            ready: false,
            done: true,
            steps: 0,
            info: StepInfo::default(),
            lanes: None,
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn track(&self) -> &Track {
        &self.track
    }

    pub fn car_state(&self) -> CarState {
        self.state
    }

    pub fn camera(&self) -> &CameraModel {
        &self.camera
    }

    /// Steps taken in the current episode.
    pub fn episode_steps(&self) -> u32 {
        self.steps
    }

    /// Lane lines behind the latest segmented observation.
    pub fn last_lanes(&self) -> Option<&LanePair> {
        self.lanes.as_ref()
    }

    /// Start an episode from an explicit pose instead of a random one.
    pub fn reset_to(&mut self, state: CarState) -> Result<Observation, EnvError> {
        self.state = state;
        let (cte, s) = cross_track_error(&self.track, state.x, state.y);
        self.info = StepInfo { cte, arclength_s: s, lap_progress_total: 0.0, laps: 0, sim_steps: 0 };
        self.steps = 0;
        self.ready = true;
        self.done = false;
        self.observe(true)
    }

    /// The current camera frame, before the observation pipeline.
    pub fn render(&self) -> Frame {
        render_camera(&self.track, &self.state, &self.camera)
    }

    fn observe(&mut self, reset: bool) -> Result<Observation, EnvError> {
        let frame = self.render();
        let (w, h) = self.config.observation_mode.frame_size();
        let small = match self.config.observation_mode {
            ObservationMode::Raw => resize_bilinear(&frame, w, h)?,
            ObservationMode::Lowres => resize_area(&frame, w, h)?,
            ObservationMode::Segmented => {
                let seg = segment_lanes(&frame, &self.segment, w, h)?;
                self.lanes = Some(seg.lanes);
                seg.raster
            }
        };
        let data = self.stack.push(small, reset)?;
        Ok(Observation::new(self.stack.shape(), data))
    }
}

impl Environment for LaneEnv {
    fn action_count(&self) -> usize {
        ACTION_STEERING.len()
    }

    fn observation_shape(&self) -> [usize; 3] {
        self.stack.shape()
    }

    fn reset(&mut self, seed: Option<u64>) -> Result<Observation, EnvError> {
        if let Some(seed) = seed {
            self.rng = ChaCha8Rng::seed_from_u64(seed);
        }
        let s = self.rng.gen_range(0.0..self.track.total_length);
        let jitter = self.rng.gen_range(-RESET_HEADING_JITTER..RESET_HEADING_JITTER);
        let (p, t) = self.track.pose_at(s);
        let heading = crate::sim::car::normalize_angle(t[1].atan2(t[0]) + jitter);
        debug_assert!(heading.abs() <= PI);
        self.reset_to(CarState { x: p[0], y: p[1], heading, speed: 0.0 })
    }

    fn step(&mut self, action: usize) -> Result<StepResult, EnvError> {
        if !self.ready {
            return Err(EnvError::NotReset);
        }
        if self.done {
            return Err(EnvError::EpisodeDone);
        }
        let control = decode_action(action)?;
        self.steps += 1;
        let mut reward = 0.0;
        let mut done = false;
        for _ in 0..self.config.frame_skip {
            self.state = step_kinematics(&self.car, self.state, control, self.car.dt);
            let (cte, s) = cross_track_error(&self.track, self.state.x, self.state.y);
            self.info.lap_progress_total += lap_progress(&self.track, self.info.arclength_s, s);
            self.info.cte = cte;
            self.info.arclength_s = s;
            self.info.sim_steps += 1;
            let (r, d) = reward_for_cte(cte, self.track.lane_half_width(), self.steps, self.config.max_episode_steps);
            reward += r;
            if d {
                done = true;
                break;
            }
        }
        self.info.laps = (self.info.lap_progress_total / self.track.total_length).floor().max(0.0) as u32;
        self.done = done;
        let observation = self.observe(false)?;
        Ok(StepResult { observation, reward, done, info: self.info })
    }

    fn is_game_over(&self) -> bool {
        !self.ready || self.done
    }

    fn info(&self) -> StepInfo {
        self.info
    }
}
