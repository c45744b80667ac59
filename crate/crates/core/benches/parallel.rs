//! Single-thread pool against the default rayon pool on the two hot paths.
//! Build with `--no-default-features` to measure the sequential fallback.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lanedrive::qnet::{train_batch, AdamState, Arch, Batch, QParams};
use lanedrive::sim::{load_track, render_camera, CameraModel, CarState};
use lanedrive::vision::{canny, hough_segments};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::{ThreadPool, ThreadPoolBuilder};

fn pools() -> Vec<(&'static str, ThreadPool)> {
    let one = ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let all = ThreadPoolBuilder::new().build().unwrap();
    vec![("1_thread", one), ("all_threads", all)]
}

fn bench_train_batch(c: &mut Criterion) {
    let arch = Arch::dqn([80, 80, 4], 5);
    let params = QParams::<f32>::init(&arch, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let n = 32;
    let batch = Batch {
        states: (0..n * params.input_len()).map(|_| rng.gen_range(0.0..1.0)).collect(),
        actions: (0..n).map(|_| rng.gen_range(0..5)).collect(),
        targets: (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
    };
    let mut group = c.benchmark_group("train_batch_dqn_80x80x4_b32");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            pool.install(|| {
                let mut p = params.clone();
                let mut opt = AdamState::new(&p);
                b.iter(|| train_batch(&mut p, black_box(&batch), 1e-4, &mut opt).unwrap())
            })
        });
    }
    group.finish();
}

fn bench_hough(c: &mut Criterion) {
    let track = load_track("oval").unwrap();
    let (p, t) = track.pose_at(7.0);
    let state = CarState { x: p[0], y: p[1], heading: t[1].atan2(t[0]), speed: 0.0 };
    let edges = canny(&render_camera(&track, &state, &CameraModel::default()), 50.0, 100.0).unwrap();
    let mut group = c.benchmark_group("hough_160x120");
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            pool.install(|| b.iter(|| hough_segments(black_box(&edges))))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_train_batch, bench_hough);
criterion_main!(benches);
