use super::{EnvError, Environment, Observation, StepInfo, StepResult};

/// Deterministic chain: states `0..n`, start at 0, action 0 moves left
/// (clamped at 0), action 1 moves right. Reaching `n − 1` pays 1 and ends the
/// episode; every other transition pays 0. Observations are one-hot with 255.
#[derive(Debug, Clone)]
pub struct ChainEnv {
    states: usize,
    max_steps: u32,
    position: usize,
    steps: u32,
    ready: bool,
    done: bool,
}

impl ChainEnv {
    pub fn new(states: usize, max_steps: u32) -> Self {
        assert!(states >= 2, "a chain needs at least two states");
        Self { states, max_steps, position: 0, steps: 0, ready: false, done: true }
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn position(&self) -> usize {
        self.position
    }

    pub fn one_hot(&self, state: usize) -> Observation {
        let mut data = vec![0u8; self.states];
        data[state] = 255;
        Observation::new(self.observation_shape(), data)
    }

    /// Successor state and reward of the deterministic dynamics.
    pub fn transition(&self, state: usize, action: usize) -> (usize, f64, bool) {
        let next = if action == 0 { state.saturating_sub(1) } else { (state + 1).min(self.states - 1) };
        let terminal = next == self.states - 1;
        (next, if terminal { 1.0 } else { 0.0 }, terminal)
    }
}

impl Environment for ChainEnv {
    fn action_count(&self) -> usize {
        2
    }

    fn observation_shape(&self) -> [usize; 3] {
        [1, 1, self.states]
    }

    fn reset(&mut self, _seed: Option<u64>) -> Result<Observation, EnvError> {
        self.position = 0;
        self.steps = 0;
        self.ready = true;
        self.done = false;
        Ok(self.one_hot(0))
    }

    fn step(&mut self, action: usize) -> Result<StepResult, EnvError> {
        if !self.ready {
            return Err(EnvError::NotReset);
        }
        if self.done {
            return Err(EnvError::EpisodeDone);
        }
        if action >= 2 {
            return Err(EnvError::InvalidAction { action, count: 2 });
        }
        let (next, reward, terminal) = self.transition(self.position, action);
        self.position = next;
        self.steps += 1;
        self.done = terminal || self.steps >= self.max_steps;
        Ok(StepResult { observation: self.one_hot(next), reward, done: self.done, info: self.info() })
    }

    fn is_game_over(&self) -> bool {
        !self.ready || self.done
    }

    fn info(&self) -> StepInfo {
        StepInfo { sim_steps: self.steps as u64, ..StepInfo::default() }
    }
}
