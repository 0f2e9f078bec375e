use std::f64::consts::PI;

use dockkit_core::config::GlobalConfig;
use dockkit_core::metrics::{aer, evaluate, fdoe, fdpe, is_success, l2_distance, summarize, EvalSettings};
use dockkit_core::record::EpisodeStatus;
use dockkit_core::types::{OrientationVec, Pose2D, Trajectory};
use proptest::prelude::*;

fn trajectory(n: usize) -> impl Strategy<Value = Trajectory> {
    prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64, -PI..PI), n).prop_map(|v| {
        let poses: Vec<Pose2D> = v.into_iter().map(|(x, y, a)| Pose2D::new(x, y, a)).collect();
        Trajectory::from_poses(&poses).unwrap()
    })
}

fn pair() -> impl Strategy<Value = (Trajectory, Trajectory)> {
    (1usize..20).prop_flat_map(|n| (trajectory(n), trajectory(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn errors_are_nonnegative_bounded_and_vanish_on_self((p, g) in pair()) {
        for f in [l2_distance, aer, fdpe, fdoe] {
            prop_assert!(f(&p, &g).unwrap() >= 0.0);
            prop_assert_eq!(f(&g, &g).unwrap(), 0.0);
        }
        for f in [aer, fdoe] {
            prop_assert!(f(&p, &g).unwrap() <= 180.0);
        }
        if p.positions() != g.positions() {
            prop_assert!(l2_distance(&p, &g).unwrap() > 0.0);
        }
    }

    #[test]
    fn errors_survive_a_shared_rigid_motion((p, g) in pair(), x in -9.0..9.0f64, y in -9.0..9.0f64, a in -PI..PI) {
        let frame = Pose2D::new(x, y, a);
        let (pt, gt) = (p.transformed(&frame), g.transformed(&frame));
        for f in [l2_distance, aer, fdpe, fdoe] {
            prop_assert!((f(&p, &g).unwrap() - f(&pt, &gt).unwrap()).abs() <= 1e-9);
        }
    }
}

#[test]
fn thresholds_are_strict() {
    assert!(!is_success(0.05, 0.0, true, true));
    assert!(!is_success(0.0, 5.0, true, true));
    assert!(is_success(0.049_999, 4.999, true, true));
    assert!(!is_success(0.0, 0.0, false, true));
    assert!(!is_success(0.0, 0.0, true, false));
    let gt = Trajectory::new(vec![[0.0, 0.0]], vec![OrientationVec::from_angle(0.0).unwrap()]).unwrap();
    let off = Trajectory::new(vec![[0.03, 0.04]], vec![OrientationVec::from_angle(0.0).unwrap()]).unwrap();
    assert_eq!(fdpe(&off, &gt).unwrap(), 0.05);
}

#[test]
fn docked_episodes_pass_their_own_evaluation() {
    let cfg = GlobalConfig {
        seed: 2024,
        episodes: 40,
        ..GlobalConfig::default()
    };
    let mut reports = Vec::new();
    for i in 0..cfg.episodes {
        let rec = cfg.run_indexed_episode(i).unwrap();
        if rec.status != EpisodeStatus::Docked {
            continue;
        }
        let settings = EvalSettings {
            robot_radius: cfg.dwa.robot_radius,
            v_max: cfg.dwa.v_max,
            w_max: cfg.dwa.w_max,
            margin: cfg.eval.limit_margin,
            duration: rec.duration(),
            frame: rec.start_pose(),
        };
        let r = evaluate(&rec.gt_trajectory, &rec.gt_trajectory, &rec.world, &settings).unwrap();
        assert!(r.success, "episode {i}: {r:?}");
        reports.push(r);
    }
    assert!(reports.len() >= 30);
    let s = summarize(&reports).unwrap();
    assert_eq!((s.l2_dis, s.aer, s.fdpe, s.fdoe, s.sr), (0.0, 0.0, 0.0, 0.0, 1.0));
}
