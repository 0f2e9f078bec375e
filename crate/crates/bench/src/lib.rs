//! Benchmark bodies; `benches/kernels.rs` wires them into criterion.

use std::hint::black_box;

use criterion::{BenchmarkId, Criterion, Throughput};
use dockkit_core::config::GlobalConfig;
use dockkit_core::controller::{dwa_step, DwaConfig, RobotState};
use dockkit_core::geometry::{backproject, build_direction_matrix, CameraIntrinsics, DepthImage};
use dockkit_core::simulator::{lidar_scan, render_depth, run_episode};
use dockkit_core::Pose2D;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn vga_depth() -> (CameraIntrinsics, DepthImage) {
    let intr = CameraIntrinsics::new(525.0, 525.0, 319.5, 239.5, 640, 480).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let data = (0..640 * 480).map(|_| rng.random_range(0..8000)).collect();
    (intr, DepthImage::new(640, 480, data, 1000.0).unwrap())
}

pub fn geometry(c: &mut Criterion) {
    let (intr, depth) = vga_depth();
    let dm = build_direction_matrix(&intr, false).unwrap();
    let mut group = c.benchmark_group("backproject_vga");
    for stride in [1usize, 5] {
        group.throughput(Throughput::Elements(((640 / stride) * (480 / stride)) as u64));
        group.bench_with_input(BenchmarkId::from_parameter(stride), &stride, |b, &s| {
            b.iter(|| backproject(&dm, black_box(&depth), s).unwrap())
        });
    }
    group.finish();
    c.bench_function("direction_matrix_vga", |b| {
        b.iter(|| build_direction_matrix(black_box(&intr), false).unwrap())
    });
}

pub fn simulation(c: &mut Criterion) {
    let cfg = GlobalConfig {
        seed: 12,
        ..GlobalConfig::default()
    };
    let sc = cfg.scenario(cfg.seed).unwrap();
    let pose = sc.start;
    let scan = lidar_scan(&sc.world, &pose, 360, 8.0).unwrap();
    let dwa = DwaConfig::default();
    let state = RobotState { pose, v: 0.3, w: 0.0 };
    let goal = Pose2D::new(1.0, 0.0, 0.0);
    let cam = cfg.sim.camera;

    c.bench_function("lidar_scan_360", |b| {
        b.iter(|| lidar_scan(black_box(&sc.world), &pose, 360, 8.0).unwrap())
    });
    c.bench_function("dwa_step_11x21", |b| {
        b.iter(|| dwa_step(black_box(&state), &goal, &scan, &dwa))
    });
    c.bench_function("render_depth_128", |b| {
        b.iter(|| {
            render_depth(
                black_box(&sc.world),
                &pose,
                &cam.intrinsics,
                cam.mount_height,
                cam.depth_scale,
            )
            .unwrap()
        })
    });
    let ep = cfg.episode_config(sc.start, cfg.seed);
    let mut group = c.benchmark_group("episode");
    group.sample_size(10);
    group.bench_function("run_episode", |b| {
        b.iter(|| run_episode(black_box(&sc.world), &ep).unwrap())
    });
    group.finish();
}
