use std::f64::consts::TAU;

use dockkit_core::config::GlobalConfig;
use dockkit_core::controller::RobotState;
use dockkit_core::record::{EpisodeStatus, RawLog};
use dockkit_core::simulator::{resample_trajectory, run_episode, step_kinematics, WorldGenConfig};
use dockkit_core::types::{Pose2D, VelocityCommand};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn episodes_start_at_identity_and_never_penetrate(seed in 0u64..1_000_000) {
        let cfg = GlobalConfig { seed, ..GlobalConfig::default() };
        let rec = cfg.run_indexed_episode(0).unwrap();
        let (t0, p0) = rec.raw_log.samples()[0];
        prop_assert_eq!(t0, 0.0);
        prop_assert_eq!(p0, Pose2D::new(0.0, 0.0, 0.0));
        prop_assert!(rec.status != EpisodeStatus::Collision);
        if rec.status == EpisodeStatus::Docked {
            let start = rec.start_pose();
            for (_, p) in rec.raw_log.samples() {
                let w = start.compose(p);
                prop_assert!(rec.world.clearance(w.position()) >= cfg.dwa.robot_radius);
            }
        }
        let first = rec.gt_trajectory.pose(0);
        prop_assert!(first.x == 0.0 && first.y == 0.0 && first.psi == 0.0);
    }

    #[test]
    fn resampling_keeps_arc_length(
        v in 0.1..1.0f64,
        turn in -TAU..TAU,
        ticks in 50usize..400,
        q in 32usize..80,
    ) {
        // Smooth: at most one full turn over the whole log.
        let w = turn / (ticks as f64 * 0.1);
        let mut state = RobotState::at(Pose2D::new(0.0, 0.0, 0.0));
        let cmd = VelocityCommand::new(v, w);
        let mut samples = vec![(0.0, state.pose)];
        for k in 1..=ticks {
            state = step_kinematics(&state, &cmd, 0.1);
            samples.push((k as f64 * 0.1, state.pose));
        }
        let log = RawLog::new(samples).unwrap();
        let logged: f64 = log.samples().windows(2).map(|s| s[0].1.distance_to(&s[1].1)).sum();
        let traj = resample_trajectory(&log, q, 1.0 / 1.5).unwrap();
        prop_assert_eq!(traj.len(), q);
        prop_assert!((traj.path_length() - logged).abs() <= 0.01 * logged, "{} vs {}", traj.path_length(), logged);
        prop_assert_eq!(traj.pose(0).position(), [0.0, 0.0]);
        prop_assert_eq!(traj.positions()[q - 1], log.last_pose().position());
    }

    #[test]
    fn arcs_stay_on_their_circle(v in 0.05..2.0f64, w in prop_oneof![-3.0..-0.05f64, 0.05..3.0f64], psi in -3.1..3.1f64) {
        let mut state = RobotState::at(Pose2D::new(1.0, -2.0, psi));
        let r = v / w.abs();
        let cx = 1.0 - (v / w) * psi.sin();
        let cy = -2.0 + (v / w) * psi.cos();
        let cmd = VelocityCommand::new(v, w);
        for _ in 0..200 {
            state = step_kinematics(&state, &cmd, 0.05);
            prop_assert!(((state.pose.x - cx).hypot(state.pose.y - cy) - r).abs() <= 1e-9);
        }
    }
}

#[test]
fn identical_inputs_give_identical_records() {
    for seed in [3u64, 17, 99] {
        let cfg = GlobalConfig {
            seed,
            ..GlobalConfig::default()
        };
        let a = cfg.run_indexed_episode(0).unwrap();
        let b = cfg.run_indexed_episode(0).unwrap();
        assert_eq!(a.status, b.status);
        assert_eq!(a.depth, b.depth);
        assert_eq!(a.raw_log.len(), b.raw_log.len());
        for ((ta, pa), (tb, pb)) in a.raw_log.samples().iter().zip(b.raw_log.samples()) {
            assert_eq!(ta.to_bits(), tb.to_bits());
            for (x, y) in [(pa.x, pb.x), (pa.y, pb.y), (pa.psi, pb.psi)] {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
        assert_eq!(a.gt_trajectory, b.gt_trajectory);
    }
}

#[test]
fn obstacle_free_episode_docks() {
    let cfg = GlobalConfig {
        seed: 5,
        worldgen: WorldGenConfig::obstacle_free(),
        ..GlobalConfig::default()
    };
    let scenario = cfg.scenario(cfg.episode_seed(0)).unwrap();
    let rec = run_episode(
        &scenario.world,
        &cfg.episode_config(scenario.start, cfg.episode_seed(0)),
    )
    .unwrap();
    assert_eq!(rec.status, EpisodeStatus::Docked);
}
