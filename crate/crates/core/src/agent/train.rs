use std::ops::ControlFlow;
use std::path::PathBuf;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::metrics::EpisodeMetrics;
use super::policy::{argmax, ddqn_targets, discounted_return, select_action_with, EpsilonSchedule};
use super::replay::{ReplayBuffer, Transition};
use super::AgentError;
use crate::env::Environment;
use crate::qnet::{bytes_to_input, save_params, sync_target, train_batch, AdamState, Arch, Batch, NetError, QParams};

#[derive(Debug, Clone, PartialEq)]
pub struct AgentConfig {
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    pub epsilon_decay_steps: u64,
    pub buffer_capacity: usize,
    pub batch_size: usize,
    /// Environment steps between hard copies of the online network.
    pub target_sync_interval: u64,
    /// Replay size before gradient steps begin.
    pub train_start: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay_steps: 10_000,
            buffer_capacity: 10_000,
            batch_size: 64,
            target_sync_interval: 1_000,
            train_start: 1_000,
            learning_rate: 1e-4,
            seed: 0,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<(), AgentError> {
        let bad = |m: &str| Err(AgentError::Config(m.into()));
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.epsilon_start) || !(0.0..=1.0).contains(&self.epsilon_end) {
            return bad("epsilon values must lie in [0, 1]");
        }
        if self.epsilon_end > self.epsilon_start {
            return bad("epsilon_end must not exceed epsilon_start");
        }
        if self.epsilon_decay_steps == 0
            || self.buffer_capacity == 0
            || self.batch_size == 0
            || self.target_sync_interval == 0
            || self.train_start == 0
        {
            return bad("counts must be positive");
        }
        if self.batch_size > self.buffer_capacity {
            return bad("batch_size exceeds buffer_capacity");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        Ok(())
    }

    pub fn schedule(&self) -> EpsilonSchedule {
        EpsilonSchedule { start: self.epsilon_start, end: self.epsilon_end, decay_steps: self.epsilon_decay_steps }
    }
}

pub type EpisodeObserver<'a> = dyn FnMut(&EpisodeMetrics, &QParams) -> ControlFlow<()> + 'a;

#[derive(Default)]
pub struct TrainOptions<'a> {
    pub episodes: usize,
    /// Defaults to [`Arch::for_input`] on the environment's observation shape.
    pub arch: Option<Arch>,
    /// Resume from these weights instead of a fresh initialization.
    pub initial_params: Option<QParams>,
    pub checkpoint_dir: Option<PathBuf>,
    /// Episodes between checkpoints; 0 disables periodic checkpoints.
    pub checkpoint_interval: usize,
    /// Called after each episode; `Break` stops training early.
    pub observer: Option<&'a mut EpisodeObserver<'a>>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: QParams,
    pub metrics: Vec<EpisodeMetrics>,
    pub total_steps: u64,
}

pub fn checkpoint_name(episode: usize) -> String {
    format!("episode_{episode:05}.ldqn")
}

fn q_values(params: &QParams, obs: &[u8]) -> Result<Vec<f32>, AgentError> {
    Ok(params.forward(&bytes_to_input::<f32>(obs))?)
}

/// Double DQN training.
///
/// Every random choice comes from one ChaCha8 stream seeded with
/// `config.seed`, drawn in this order: the weight-init seed (skipped when
/// resuming), then per episode the environment reset seed, then per step the
/// exploration draws followed by the replay sample indices.
pub fn train_loop<E: Environment + ?Sized>(
    env: &mut E,
    config: &AgentConfig,
    mut options: TrainOptions<'_>,
) -> Result<TrainOutcome, AgentError> {
    config.validate()?;
    let shape = env.observation_shape();
    let actions = env.action_count();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut online = match options.initial_params.take() {
        Some(p) => p,
        None => {
            let arch = options.arch.clone().unwrap_or_else(|| Arch::for_input(shape, actions));
            QParams::init(&arch, rng.next_u64())?
        }
    };
    if online.arch.input != shape || online.output_len() != actions {
        return Err(AgentError::Net(NetError::Shape(format!(
            "network {} on {:?} does not fit observations {:?} with {actions} actions",
            online.arch, online.arch.input, shape
        ))));
    }
    let mut target = sync_target(&online);
    let mut opt = AdamState::new(&online);
    let mut replay = ReplayBuffer::new(config.buffer_capacity, shape);
    let schedule = config.schedule();
    let gamma = config.gamma as f32;
    let input_len = online.input_len();
    let mut metrics = Vec::new();
    let mut total_steps = 0u64;

    for episode in 0..options.episodes {
        let boundary = options.checkpoint_dir.as_ref().map(|_| online.clone());
        let env_failure = |source| {
            if let (Some(dir), Some(p)) = (&options.checkpoint_dir, &boundary) {
                let path = dir.join(format!("abort_{}", checkpoint_name(episode)));
                if let Err(e) = save_params(p, &path) {
                    log::error!("could not write abort checkpoint {}: {e}", path.display());
                }
            }
            AgentError::Env { episode, source }
        };
        let mut obs = match env.reset(Some(rng.next_u64())) {
            Ok(o) => o,
            Err(e) => return Err(env_failure(e)),
        };
        let mut rewards = Vec::new();
        let (mut loss_sum, mut loss_count) = (0.0f64, 0u32);
        let mut epsilon;
        let mut laps;
        loop {
            epsilon = schedule.at(total_steps);
            let action = select_action_with(actions, epsilon, &mut rng, || q_values(&online, &obs.data))?;
            let step = match env.step(action) {
                Ok(s) => s,
                Err(e) => return Err(env_failure(e)),
            };
            replay.push(Transition {
                state: obs,
                action,
                reward: step.reward as f32,
                next_state: step.observation.clone(),
                done: step.done,
            })?;
            total_steps += 1;
            rewards.push(step.reward);
            laps = step.info.laps;

            if replay.len() >= config.train_start.max(config.batch_size) {
                let sample = replay.sample(config.batch_size, &mut rng)?;
                let targets = ddqn_targets(&sample, &online, &target, gamma)?;
                let mut states = Vec::with_capacity(sample.len() * input_len);
                for t in &sample {
                    states.extend(bytes_to_input::<f32>(&t.state.data));
                }
                let batch = Batch { states, actions: sample.iter().map(|t| t.action).collect(), targets };
                let loss = train_batch(&mut online, &batch, config.learning_rate, &mut opt)
                    .map_err(|source| AgentError::Divergence { episode, step: total_steps, source })?;
                loss_sum += loss as f64;
                loss_count += 1;
            }
            if total_steps.is_multiple_of(config.target_sync_interval) {
                target = sync_target(&online);
            }
            obs = step.observation;
            if step.done {
                break;
            }
        }

        let m = EpisodeMetrics {
            episode,
            steps: rewards.len() as u32,
            total_reward: rewards.iter().sum(),
            discounted_return: discounted_return(&rewards, config.gamma),
            mean_loss: if loss_count == 0 { f64::NAN } else { loss_sum / loss_count as f64 },
            epsilon,
            laps,
        };
        log::debug!("episode {episode}: {} steps, reward {:.3}", m.steps, m.total_reward);
        if let Some(dir) = &options.checkpoint_dir {
            if options.checkpoint_interval > 0 && (episode + 1) % options.checkpoint_interval == 0 {
                save_params(&online, &dir.join(checkpoint_name(episode + 1)))?;
            }
        }
        metrics.push(m);
        if let Some(observer) = options.observer.as_mut() {
            if observer(metrics.last().unwrap(), &online).is_break() {
                break;
            }
        }
    }
    Ok(TrainOutcome { params: online, metrics, total_steps })
}

/// Greedy action of `params` for one observation.
pub fn greedy_action(params: &QParams, obs: &[u8]) -> Result<usize, AgentError> {
    argmax(&q_values(params, obs)?).ok_or(AgentError::EmptyQ)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::ChainEnv;

    fn chain_config(seed: u64) -> AgentConfig {
        AgentConfig {
            gamma: 0.9,
            epsilon_decay_steps: 500,
            buffer_capacity: 1000,
            batch_size: 16,
            target_sync_interval: 50,
            train_start: 64,
            learning_rate: 1e-2,
            seed,
            ..AgentConfig::default()
        }
    }

    #[test]
    fn zero_episodes_returns_initial_params() {
        let mut env = ChainEnv::new(5, 20);
        let cfg = chain_config(1);
        let out = train_loop(&mut env, &cfg, TrainOptions::default()).unwrap();
        assert!(out.metrics.is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let expected = QParams::init(&Arch::for_input([1, 1, 5], 2), rng.next_u64()).unwrap();
        assert_eq!(out.params, expected);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let mut env = ChainEnv::new(5, 20);
        for cfg in [
            AgentConfig { gamma: 1.5, ..AgentConfig::default() },
            AgentConfig { epsilon_end: 0.9, epsilon_start: 0.5, ..AgentConfig::default() },
            AgentConfig { batch_size: 0, ..AgentConfig::default() },
        ] {
            assert!(matches!(train_loop(&mut env, &cfg, TrainOptions::default()), Err(AgentError::Config(_))));
        }
    }

    #[test]
    fn learns_the_chain() {
        let mut env = ChainEnv::new(5, 20);
        let out = train_loop(&mut env, &chain_config(3), TrainOptions { episodes: 150, ..TrainOptions::default() }).unwrap();
        for s in 0..4 {
            let obs = env.one_hot(s);
            assert_eq!(greedy_action(&out.params, &obs.data).unwrap(), 1, "state {s}");
        }
        assert!(out.metrics.iter().all(|m| m.steps >= 1));
    }

    #[test]
    fn runs_are_reproducible_and_checkpointed() {
        let run = || {
            let dir = tempfile::tempdir().unwrap();
            let mut env = ChainEnv::new(5, 20);
            let opts = TrainOptions {
                episodes: 20,
                checkpoint_dir: Some(dir.path().to_path_buf()),
                checkpoint_interval: 10,
                ..TrainOptions::default()
            };
            let out = train_loop(&mut env, &chain_config(5), opts).unwrap();
            let ckpt = std::fs::read(dir.path().join(checkpoint_name(20))).unwrap();
            assert!(dir.path().join(checkpoint_name(10)).exists());
            (crate::agent::metrics_csv(&out.metrics), ckpt)
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn observer_can_stop_training() {
        let mut env = ChainEnv::new(5, 20);
        let mut seen = 0;
        let mut stop = |_: &EpisodeMetrics, _: &QParams| {
            seen += 1;
            if seen == 3 {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        };
        let opts = TrainOptions { episodes: 50, observer: Some(&mut stop), ..TrainOptions::default() };
        let out = train_loop(&mut env, &chain_config(1), opts).unwrap();
        assert_eq!(out.metrics.len(), 3);
    }

    #[test]
    fn mismatched_resume_is_rejected() {
        let mut env = ChainEnv::new(5, 20);
        let wrong = QParams::init(&Arch::for_input([1, 1, 4], 2), 0).unwrap();
        let opts = TrainOptions { episodes: 1, initial_params: Some(wrong), ..TrainOptions::default() };
        assert!(matches!(train_loop(&mut env, &chain_config(1), opts), Err(AgentError::Net(NetError::Shape(_)))));
    }
}
