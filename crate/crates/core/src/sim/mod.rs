//! Deterministic 2D driving world: track geometry, kinematic car, synthetic
//! camera and the reward rule.

pub mod camera;
pub mod car;
pub mod reward;
pub mod track;

pub use camera::{render_camera, CameraModel};
pub use car::{step_kinematics, CarParams, CarState, Control};
pub use reward::{reward_and_done, DEFAULT_MAX_EPISODE_STEPS};
pub use track::{build_track, cross_track_error, lap_progress, load_track, Track, TrackError, TrackSpec};
