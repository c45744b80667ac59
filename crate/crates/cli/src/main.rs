mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;

/// Train, evaluate and serve a lane-following double-DQN driver.
#[derive(Debug, Parser)]
#[command(name = "lanedrive", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Accepted both before and after the subcommand. Overrides from both
/// positions apply, in command-line order.
#[derive(Debug, Clone, Default, Args)]
struct Common {
    /// Run configuration file (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for the environment, the agent and evaluation. `--set` still wins.
    #[arg(long)]
    seed: Option<u64>,
    /// Override one config key, e.g. `--set agent.gamma=0.95`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl Common {
    fn merge(mut self, later: Common) -> Common {
        self.config = later.config.or(self.config);
        self.seed = later.seed.or(self.seed);
        self.overrides.extend(later.overrides);
        self
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a policy, writing metrics and checkpoints.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        episodes: Option<usize>,
        /// Start from these weights instead of a fresh network.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Greedy rollouts of a checkpoint.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        episodes: Option<usize>,
    },
    /// Expose the environment over the line-delimited JSON protocol.
    Serve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        bind: Option<String>,
    },
    /// Run lane segmentation over a directory of PGM/PPM images.
    Pipeline {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Stages to dump: any of edges, hough, raster.
        #[arg(long, value_delimiter = ',', default_value = "edges,hough,raster")]
        stages: Vec<commands::Stage>,
    },
    /// Print a track's centerline file, optionally rendering the camera view.
    DumpTrack {
        #[command(flatten)]
        common: Common,
        /// Track name or file; defaults to `env.track`.
        track: Option<String>,
        /// Write the track file here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Render the camera frame (PGM) with the car centered at arclength `--at`.
        #[arg(long)]
        frame: Option<PathBuf>,
        #[arg(long, default_value_t = 0.0)]
        at: f64,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Train { common, .. }
            | Command::Eval { common, .. }
            | Command::Serve { common, .. }
            | Command::Pipeline { common, .. }
            | Command::DumpTrack { common, .. } => common,
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let common = cli.common.merge(cli.command.common().clone());
    let cfg = RunConfig::load(common.config.as_deref(), common.seed, &common.overrides)?;
    match cli.command {
        Command::Train { episodes, resume, .. } => commands::train(&cfg, episodes, resume.as_deref()),
        Command::Eval { checkpoint, episodes, .. } => commands::eval(&cfg, &checkpoint, episodes),
        Command::Serve { bind, .. } => commands::serve(&cfg, bind.as_deref()),
        Command::Pipeline { input, output, stages, .. } => commands::pipeline(&input, &output, &stages),
        Command::DumpTrack { track, output, frame, at, .. } => {
            commands::dump_track(track.as_deref().unwrap_or(&cfg.env.track), output.as_deref(), frame.as_deref(), at)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LANEDRIVE_LOG", "info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
