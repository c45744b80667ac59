//! Flat `key = value` run configuration with dotted sections.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use lanedrive::agent::AgentConfig;
use lanedrive::env::EnvConfig;
use lanedrive::qnet::arch::parse_layers;
use lanedrive::qnet::Arch;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub env: EnvConfig,
    pub agent: AgentConfig,
    /// Layer list such as `conv8k4s2,dense32,linear5`; `None` picks the default for the input.
    pub arch: Option<String>,
    pub episodes: usize,
    pub checkpoint_interval: usize,
    pub checkpoint_dir: PathBuf,
    pub metrics: PathBuf,
    pub bind: String,
    pub eval_episodes: usize,
    pub eval_seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            env: EnvConfig::default(),
            agent: AgentConfig::default(),
            arch: None,
            episodes: 100,
            checkpoint_interval: 10,
            checkpoint_dir: PathBuf::from("checkpoints"),
            metrics: PathBuf::from("metrics.csv"),
            bind: format!("127.0.0.1:{}", lanedrive::wire::DEFAULT_PORT),
            eval_episodes: 10,
            eval_seed: 0,
        }
    }
}

pub const KEYS: &[&str] = &[
    "env.track",
    "env.observation_mode",
    "env.frame_skip",
    "env.seed",
    "env.max_episode_steps",
    "agent.gamma",
    "agent.epsilon_start",
    "agent.epsilon_end",
    "agent.epsilon_decay_steps",
    "agent.buffer_capacity",
    "agent.batch_size",
    "agent.target_sync_interval",
    "agent.train_start",
    "agent.learning_rate",
    "agent.seed",
    "net.arch",
    "train.episodes",
    "train.checkpoint_interval",
    "paths.checkpoint_dir",
    "paths.metrics",
    "serve.bind",
    "eval.episodes",
    "eval.seed",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| anyhow!("{key}: cannot parse {value:?}: {e}"))
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "env.track" => self.env.track = value.to_string(),
            "env.observation_mode" => {
                self.env.observation_mode = value.parse().map_err(|e| anyhow!("{key}: {e}"))?
            }
            "env.frame_skip" => self.env.frame_skip = parse(key, value)?,
            "env.seed" => self.env.seed = parse(key, value)?,
            "env.max_episode_steps" => self.env.max_episode_steps = parse(key, value)?,
            "agent.gamma" => self.agent.gamma = parse(key, value)?,
            "agent.epsilon_start" => self.agent.epsilon_start = parse(key, value)?,
            "agent.epsilon_end" => self.agent.epsilon_end = parse(key, value)?,
            "agent.epsilon_decay_steps" => self.agent.epsilon_decay_steps = parse(key, value)?,
            "agent.buffer_capacity" => self.agent.buffer_capacity = parse(key, value)?,
            "agent.batch_size" => self.agent.batch_size = parse(key, value)?,
            "agent.target_sync_interval" => self.agent.target_sync_interval = parse(key, value)?,
            "agent.train_start" => self.agent.train_start = parse(key, value)?,
            "agent.learning_rate" => self.agent.learning_rate = parse(key, value)?,
            "agent.seed" => self.agent.seed = parse(key, value)?,
            "net.arch" => {
                self.arch = match value {
                    "" | "default" => None,
                    layers => {
                        parse_layers(layers).map_err(|e| anyhow!("{key}: {e}"))?;
                        Some(layers.to_string())
                    }
                }
            }
            "train.episodes" => self.episodes = parse(key, value)?,
            "train.checkpoint_interval" => self.checkpoint_interval = parse(key, value)?,
            "paths.checkpoint_dir" => self.checkpoint_dir = PathBuf::from(value),
            "paths.metrics" => self.metrics = PathBuf::from(value),
            "serve.bind" => self.bind = value.to_string(),
            "eval.episodes" => self.eval_episodes = parse(key, value)?,
            "eval.seed" => self.eval_seed = parse(key, value)?,
            _ => bail!("unknown config key {key:?}; known keys: {}", KEYS.join(", ")),
        }
        Ok(())
    }

    /// Apply every `key = value` line of `text`. Blank lines and `#` comments are ignored.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split_once('#').map_or(raw, |(before, _)| before).trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{origin}:{}: expected `key = value`", i + 1))?;
            self.set(key.trim(), value.trim()).with_context(|| format!("{origin}:{}", i + 1))?;
        }
        Ok(())
    }

    /// `k=v` override as given on the command line.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| anyhow!("--set expects key=value, got {assignment:?}"))?;
        self.set(key.trim(), value.trim())
    }

    pub fn load(path: Option<&Path>, seed: Option<u64>, overrides: &[String]) -> Result<Self> {
        let mut cfg = Self::default();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
            cfg.apply_text(&text, &path.display().to_string())?;
        }
        if let Some(seed) = seed {
            cfg.env.seed = seed;
            cfg.agent.seed = seed;
            cfg.eval_seed = seed;
        }
        for o in overrides {
            cfg.apply_override(o)?;
        }
        cfg.agent.validate().map_err(|e| anyhow!("{e}"))?;
        Ok(cfg)
    }

    /// Network architecture for the given observation shape.
    pub fn arch_for(&self, input: [usize; 3], actions: usize) -> Result<Arch> {
        Ok(match &self.arch {
            None => Arch::for_input(input, actions),
            Some(text) => Arch { input, layers: parse_layers(text).map_err(|e| anyhow!("net.arch: {e}"))? },
        })
    }
}
