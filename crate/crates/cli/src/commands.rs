use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::ValueEnum;
use lanedrive::agent::{evaluate, median, train_loop, EpisodeMetrics, TrainOptions, METRICS_HEADER};
use lanedrive::env::{Environment, LaneEnv};
use lanedrive::qnet::{load_params, save_params, QParams};
use lanedrive::sim::track::format_track_spec;
use lanedrive::sim::{load_track, render_camera, CameraModel, CarState};
use lanedrive::vision::lanes::overlay_lines;
use lanedrive::vision::{read_pnm, rgb_to_grayscale, segment_lanes, PnmImage, SegmentParams};
use lanedrive::wire::Server;

use crate::config::RunConfig;

pub const FINAL_CHECKPOINT: &str = "final.ldqn";

/// Side length of the segmentation raster, matching the segmented observation.
const RASTER_SIZE: usize = 80;

fn check_fits(params: &QParams, cfg: &RunConfig, shape: [usize; 3], actions: usize) -> Result<()> {
    let expected = cfg.arch_for(shape, actions)?;
    let fits = params.arch.input == shape && params.output_len() == actions;
    if !fits || (cfg.arch.is_some() && params.arch.layers != expected.layers) {
        bail!(
            "checkpoint network {} on {:?} does not match this configuration ({} on {:?})",
            params.arch,
            params.arch.input,
            expected,
            shape
        );
    }
    Ok(())
}

fn load_checkpoint(path: &Path, cfg: &RunConfig, env: &LaneEnv) -> Result<QParams> {
    let params = load_params(path).with_context(|| format!("loading checkpoint {}", path.display()))?;
    check_fits(&params, cfg, env.observation_shape(), env.action_count())?;
    Ok(params)
}

fn create_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(())
}

pub fn train(cfg: &RunConfig, episodes: Option<usize>, resume: Option<&Path>) -> Result<()> {
    let episodes = episodes.unwrap_or(cfg.episodes);
    let mut env = LaneEnv::new(cfg.env.clone()).context("building environment")?;
    let arch = cfg.arch_for(env.observation_shape(), env.action_count())?;
    let initial = resume.map(|p| load_checkpoint(p, cfg, &env)).transpose()?;
    if initial.is_none() {
        arch.resolve().map_err(|e| anyhow!("net.arch: {e}"))?;
    }

    // Inputs are valid; only now touch the filesystem.
    fs::create_dir_all(&cfg.checkpoint_dir)
        .with_context(|| format!("creating {}", cfg.checkpoint_dir.display()))?;
    create_parent(&cfg.metrics)?;
    let mut metrics = BufWriter::new(
        File::create(&cfg.metrics).with_context(|| format!("creating {}", cfg.metrics.display()))?,
    );
    writeln!(metrics, "{METRICS_HEADER}")?;
    metrics.flush()?;

    let mut write_error: Option<io::Error> = None;
    let mut observer = |m: &EpisodeMetrics, _: &QParams| {
        println!(
            "episode {:>4}  steps {:>4}  reward {:>9.3}  return {:>8.3}  loss {:>9.5}  eps {:.3}  laps {}",
            m.episode, m.steps, m.total_reward, m.discounted_return, m.mean_loss, m.epsilon, m.laps
        );
        let row = writeln!(metrics, "{}", m.csv_row()).and_then(|_| metrics.flush());
        match row {
            Ok(()) => ControlFlow::Continue(()),
            Err(e) => {
                write_error = Some(e);
                ControlFlow::Break(())
            }
        }
    };
    let options = TrainOptions {
        episodes,
        arch: Some(arch),
        initial_params: initial,
        checkpoint_dir: Some(cfg.checkpoint_dir.clone()),
        checkpoint_interval: cfg.checkpoint_interval,
        observer: Some(&mut observer),
    };
    let outcome = train_loop(&mut env, &cfg.agent, options)?;
    if let Some(e) = write_error {
        return Err(e).with_context(|| format!("writing {}", cfg.metrics.display()));
    }
    let final_path = cfg.checkpoint_dir.join(FINAL_CHECKPOINT);
    save_params(&outcome.params, &final_path)?;
    println!(
        "trained {} episodes ({} steps); checkpoint {}; metrics {}",
        outcome.metrics.len(),
        outcome.total_steps,
        final_path.display(),
        cfg.metrics.display()
    );
    Ok(())
}

pub fn eval(cfg: &RunConfig, checkpoint: &Path, episodes: Option<usize>) -> Result<()> {
    let episodes = episodes.unwrap_or(cfg.eval_episodes);
    let env = LaneEnv::new(cfg.env.clone()).context("building environment")?;
    let params = load_checkpoint(checkpoint, cfg, &env)?;
    if episodes == 0 {
        println!("no episodes requested");
        return Ok(());
    }
    let env_cfg = cfg.env.clone();
    let results = evaluate(|| LaneEnv::new(env_cfg.clone()), &params, episodes, cfg.eval_seed)?;
    for (i, r) in results.iter().enumerate() {
        println!("episode {i:>3}  steps {:>4}  reward {:>9.3}  laps {}", r.steps, r.total_reward, r.laps);
    }
    let steps: Vec<u32> = results.iter().map(|r| r.steps).collect();
    let laps: Vec<u32> = results.iter().map(|r| r.laps).collect();
    println!("median steps {}  median laps {}", median(&steps).unwrap(), median(&laps).unwrap());
    Ok(())
}

pub fn serve(cfg: &RunConfig, bind: Option<&str>) -> Result<()> {
    let addr = bind.unwrap_or(&cfg.bind);
    let mut env = LaneEnv::new(cfg.env.clone()).context("building environment")?;
    let server = Server::bind(addr).with_context(|| format!("binding {addr}"))?;
    let shutdown = Arc::new(AtomicBool::new(false));
    let flag = Arc::clone(&shutdown);
    ctrlc::set_handler(move || flag.store(true, Ordering::Relaxed)).context("installing interrupt handler")?;
    println!("listening on {}", server.local_addr()?);
    io::stdout().flush()?;
    server.serve_forever(&mut env, &shutdown)?;
    log::info!("shutting down");
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Stage {
    Edges,
    Hough,
    Raster,
}

fn pnm_inputs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let path = entry?.path();
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        if path.is_file() && matches!(ext.as_deref(), Some("pgm" | "ppm")) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn write_pgm(frame: &lanedrive::vision::Frame, path: &Path) -> Result<()> {
    fs::write(path, frame.to_pgm_bytes()).with_context(|| format!("writing {}", path.display()))
}

pub fn pipeline(input: &Path, output: &Path, stages: &[Stage]) -> Result<()> {
    let files = pnm_inputs(input)?;
    if files.is_empty() {
        println!("no PGM/PPM files in {}", input.display());
        return Ok(());
    }
    fs::create_dir_all(output).with_context(|| format!("creating {}", output.display()))?;
    let params = SegmentParams::default();
    for path in files {
        let file = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
        let image = read_pnm(io::BufReader::new(file)).with_context(|| format!("decoding {}", path.display()))?;
        let gray = match image {
            PnmImage::Gray(f) => f,
            PnmImage::Rgb(rgb) => rgb_to_grayscale(&rgb)?,
        };
        let seg = segment_lanes(&gray, &params, RASTER_SIZE, RASTER_SIZE)
            .with_context(|| format!("segmenting {}", path.display()))?;
        let stem = path.file_stem().unwrap().to_string_lossy();
        for stage in stages {
            match stage {
                Stage::Edges => write_pgm(&seg.edges, &output.join(format!("{stem}_edges.pgm")))?,
                Stage::Hough => write_pgm(&overlay_lines(&gray, &seg.lines), &output.join(format!("{stem}_hough.pgm")))?,
                Stage::Raster => write_pgm(&seg.raster, &output.join(format!("{stem}_raster.pgm")))?,
            }
        }
        println!("{}: {} hough lines, {} lane lines", path.display(), seg.lines.len(), seg.lanes.count());
    }
    Ok(())
}

pub fn dump_track(track: &str, output: Option<&Path>, frame: Option<&Path>, at: f64) -> Result<()> {
    let track = load_track(track).with_context(|| format!("loading track {track:?}"))?;
    let text = format_track_spec(&track.spec);
    match output {
        Some(path) => fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    if let Some(path) = frame {
        let (p, t) = track.pose_at(at);
        let state = CarState { x: p[0], y: p[1], heading: t[1].atan2(t[0]), speed: 0.0 };
        write_pgm(&render_camera(&track, &state, &CameraModel::default()), path)?;
    }
    Ok(())
}
