use super::car::CarState;
use super::track::{cross_track_error, Track};

pub const DEFAULT_MAX_EPISODE_STEPS: u32 = 1000;

/// Dense centering reward: `1 − (cte/w)²` inside the lane, `−1` and terminal
/// once the car leaves it. The episode also ends when `step_count` reaches
/// `max_episode_steps`.
pub fn reward_and_done(track: &Track, state: &CarState, step_count: u32, max_episode_steps: u32) -> (f64, bool) {
    let (cte, _) = cross_track_error(track, state.x, state.y);
    reward_for_cte(cte, track.lane_half_width(), step_count, max_episode_steps)
}

pub fn reward_for_cte(cte: f64, lane_half_width: f64, step_count: u32, max_episode_steps: u32) -> (f64, bool) {
    if cte.abs() <= lane_half_width {
        let r = cte / lane_half_width;
        (1.0 - r * r, step_count >= max_episode_steps)
    } else {
        (-1.0, true)
    }
}
