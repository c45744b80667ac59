//! Double DQN: replay memory, epsilon-greedy exploration, double-Q targets,
//! the training loop and greedy evaluation.

pub mod eval;
pub mod metrics;
pub mod policy;
pub mod replay;
pub mod train;

use thiserror::Error;

use crate::env::EnvError;
use crate::qnet::NetError;

pub use eval::{evaluate, median, EvalEpisode};
pub use metrics::{format_g6, metrics_csv, EpisodeMetrics, METRICS_HEADER};
pub use policy::{argmax, ddqn_targets, discounted_return, select_action, EpsilonSchedule};
pub use replay::{ReplayBuffer, Transition};
pub use train::{train_loop, AgentConfig, TrainOptions, TrainOutcome};

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("invalid agent config: {0}")]
    Config(String),
    #[error("empty q-value vector")]
    EmptyQ,
    #[error("replay buffer holds {size} transitions, {requested} requested")]
    InsufficientData { size: usize, requested: usize },
    #[error("observation shape {actual:?} does not match {expected:?}")]
    ShapeMismatch { expected: [usize; 3], actual: [usize; 3] },
    #[error("non-finite q-values")]
    NonFiniteQ,
    #[error("diverged at episode {episode}, step {step}: {source}")]
    Divergence { episode: usize, step: u64, source: NetError },
    #[error("environment failed in episode {episode}: {source}")]
    Env { episode: usize, source: EnvError },
    #[error(transparent)]
    Net(#[from] NetError),
}
