use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::path::Path;
use std::process::{Command, Output, Stdio};
use std::time::Duration;

fn lanedrive(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lanedrive"))
        .args(args)
        .current_dir(dir)
        .env("LANEDRIVE_LOG", "error")
        .output()
        .expect("spawn lanedrive")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const LOWRES_CFG: &str = "\
# small, fast run
env.observation_mode = lowres
agent.train_start = 32
agent.batch_size = 16
agent.epsilon_decay_steps = 200
train.checkpoint_interval = 2
";

fn write_cfg(dir: &Path) {
    std::fs::write(dir.join("oval.cfg"), LOWRES_CFG).unwrap();
}

#[test]
fn train_zero_episodes_writes_header_and_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    write_cfg(dir.path());
    let out = lanedrive(dir.path(), &["train", "--config", "oval.cfg", "--episodes", "0"]);
    assert!(out.status.success(), "{out:?}");
    let csv = std::fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    assert_eq!(csv, "episode,steps,total_reward,discounted_return,mean_loss,epsilon,laps\n");
    assert!(dir.path().join("checkpoints/final.ldqn").exists());
}

#[test]
fn training_is_reproducible() {
    let run = |sub: &str| {
        let dir = tempfile::tempdir().unwrap();
        write_cfg(dir.path());
        let out = lanedrive(dir.path(), &["--seed", "3", "train", "--config", "oval.cfg", "--episodes", "4", "--set", &format!("paths.metrics={sub}/m.csv")]);
        assert!(out.status.success(), "{out:?}");
        let csv = std::fs::read(dir.path().join(sub).join("m.csv")).unwrap();
        let ckpt = std::fs::read(dir.path().join("checkpoints/final.ldqn")).unwrap();
        let periodic = std::fs::read(dir.path().join("checkpoints/episode_00004.ldqn")).unwrap();
        assert_eq!(ckpt, periodic);
        (csv, ckpt)
    };
    let a = run("a");
    assert_eq!(String::from_utf8_lossy(&a.0).lines().count(), 5);
    assert_eq!(a, run("b"));
}

#[test]
fn missing_track_fails_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = lanedrive(dir.path(), &["train", "--set", "env.track=tracks/none.trk", "--episodes", "1"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.contains("none.trk"));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn bad_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.cfg"), "agent.gama = 0.9\n").unwrap();
    let out = lanedrive(dir.path(), &["train", "--config", "bad.cfg", "--episodes", "0"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown config key"));
}

#[test]
fn eval_random_weights_and_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    write_cfg(dir.path());
    assert!(lanedrive(dir.path(), &["train", "--config", "oval.cfg", "--episodes", "0"]).status.success());

    let out = lanedrive(dir.path(), &["eval", "--config", "oval.cfg", "--checkpoint", "checkpoints/final.ldqn", "--episodes", "10"]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| l.starts_with("episode")).count(), 10);
    let median: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("median steps "))
        .and_then(|rest| rest.split_whitespace().next())
        .unwrap()
        .parse()
        .unwrap();
    assert!(median < 60.0, "random policy median {median}");

    let out = lanedrive(dir.path(), &["eval", "--config", "oval.cfg", "--checkpoint", "checkpoints/final.ldqn", "--episodes", "0"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "no episodes requested");

    let mut bytes = std::fs::read(dir.path().join("checkpoints/final.ldqn")).unwrap();
    bytes.truncate(bytes.len() / 2);
    std::fs::write(dir.path().join("broken.ldqn"), bytes).unwrap();
    let out = lanedrive(dir.path(), &["eval", "--config", "oval.cfg", "--checkpoint", "broken.ldqn"]);
    assert!(!out.status.success());

    // A lowres checkpoint does not fit the default 80×80 observation.
    let out = lanedrive(dir.path(), &["eval", "--checkpoint", "checkpoints/final.ldqn", "--episodes", "1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not match"));
}

#[test]
fn serve_handshake_and_interrupt() {
    let dir = tempfile::tempdir().unwrap();
    let mut child = Command::new(env!("CARGO_BIN_EXE_lanedrive"))
        .args(["serve", "--bind", "127.0.0.1:0"])
        .current_dir(dir.path())
        .env("LANEDRIVE_LOG", "error")
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut lines = BufReader::new(child.stdout.take().unwrap()).lines();
    let banner = lines.next().unwrap().unwrap();
    let addr = banner.strip_prefix("listening on ").unwrap().to_string();

    let stream = TcpStream::connect(&addr).unwrap();
    stream.set_read_timeout(Some(Duration::from_secs(30))).unwrap();
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut hello = String::new();
    reader.read_line(&mut hello).unwrap();
    assert_eq!(hello, "{\"type\":\"hello\",\"protocol_version\":1,\"action_count\":5,\"obs_shape\":[80,80,4]}\n");
    (&stream).write_all(b"{\"type\":\"close\"}\n").unwrap();

    // Port conflict while the first server holds its address.
    let out = lanedrive(dir.path(), &["serve", "--bind", &addr]);
    assert!(!out.status.success());

    let status = Command::new("kill").args(["-INT", &child.id().to_string()]).status().unwrap();
    assert!(status.success());
    assert!(child.wait().unwrap().success());
}

#[test]
fn serve_bind_failure() {
    let holder = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = holder.local_addr().unwrap().to_string();
    let dir = tempfile::tempdir().unwrap();
    let out = lanedrive(dir.path(), &["serve", "--bind", &addr]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("binding"));
}

fn pgm(w: usize, h: usize, pixels: &[u8]) -> Vec<u8> {
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

fn pgm_pixels(bytes: &[u8]) -> (usize, usize, Vec<u8>) {
    let text = String::from_utf8_lossy(&bytes[..20]).into_owned();
    let mut it = text.split_whitespace().skip(1);
    let w: usize = it.next().unwrap().parse().unwrap();
    let h: usize = it.next().unwrap().parse().unwrap();
    (w, h, bytes[bytes.len() - w * h..].to_vec())
}

#[test]
fn pipeline_cases() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in");
    std::fs::create_dir(&input).unwrap();

    let out = lanedrive(dir.path(), &["pipeline", "--input", "in", "--output", "out"]);
    assert!(out.status.success());
    assert!(!dir.path().join("out").exists());

    std::fs::write(input.join("flat.pgm"), pgm(160, 120, &[90; 160 * 120])).unwrap();
    let out = lanedrive(dir.path(), &["dump-track", "oval", "--frame", "in/straight.pgm", "--at", "7"]);
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).starts_with("name = oval"));

    let out = lanedrive(dir.path(), &["pipeline", "--input", "in", "--output", "out"]);
    assert!(out.status.success(), "{out:?}");
    let report = stdout(&out);
    assert!(report.contains("flat.pgm: 0 hough lines, 0 lane lines"), "{report}");
    assert!(report.contains("straight.pgm:") && report.contains("2 lane lines"), "{report}");
    for stem in ["flat", "straight"] {
        for stage in ["edges", "hough", "raster"] {
            assert!(dir.path().join(format!("out/{stem}_{stage}.pgm")).exists());
        }
    }
    let (_, _, flat) = pgm_pixels(&std::fs::read(dir.path().join("out/flat_raster.pgm")).unwrap());
    assert!(flat.iter().all(|&p| p == 0));
    let (w, h, straight) = pgm_pixels(&std::fs::read(dir.path().join("out/straight_raster.pgm")).unwrap());
    assert_eq!((w, h), (80, 80));
    let lit = |x0: usize, x1: usize| (0..h).any(|y| (x0..x1).any(|x| straight[y * w + x] == 255));
    assert!(lit(0, w / 2) && lit(w / 2, w));

    std::fs::write(input.join("zbroken.pgm"), b"P5\n10 10\n255\nshort").unwrap();
    let out = lanedrive(dir.path(), &["pipeline", "--input", "in", "--output", "out2", "--stages", "raster"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("zbroken.pgm"));
}
