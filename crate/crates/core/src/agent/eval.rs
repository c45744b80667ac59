use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::train::greedy_action;
use super::AgentError;
use crate::env::{EnvError, Environment};
use crate::par;
use crate::qnet::QParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalEpisode {
    pub steps: u32,
    pub total_reward: f64,
    pub laps: u32,
}

/// Reset seed of evaluation episode `i`, independent of how many run.
pub fn eval_seed(base: u64, i: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(i as u64 + 1);
    rng.next_u64()
}

/// Greedy (ε = 0) rollouts, one fresh environment per episode. Episodes run in
/// parallel; results are in episode order and do not depend on thread count.
pub fn evaluate<E, F>(make_env: F, params: &QParams, episodes: usize, seed: u64) -> Result<Vec<EvalEpisode>, AgentError>
where
    E: Environment,
    F: Fn() -> Result<E, EnvError> + Sync,
{
    let results = par::map_indexed(episodes, |i| {
        let wrap = |source| AgentError::Env { episode: i, source };
        let mut env = make_env().map_err(wrap)?;
        let mut obs = env.reset(Some(eval_seed(seed, i))).map_err(wrap)?;
        let mut ep = EvalEpisode { steps: 0, total_reward: 0.0, laps: 0 };
        loop {
            let step = env.step(greedy_action(params, &obs.data)?).map_err(wrap)?;
            ep.steps += 1;
            ep.total_reward += step.reward;
            ep.laps = step.info.laps;
            obs = step.observation;
            if step.done {
                return Ok(ep);
            }
        }
    });
    results.into_iter().collect()
}

/// Median of episode lengths; the mean of the two middle values for even counts.
pub fn median(values: &[u32]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_unstable();
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] as f64 } else { (v[n / 2 - 1] as f64 + v[n / 2] as f64) / 2.0 })
}
