use std::f64::consts::PI;

use dockkit_core::planner::{compute_docking_points, plan_vpg, DockingStation, PhaseKind, PhaseTarget, PlanTolerances};
use dockkit_core::types::{angle_diff, Pose2D};
use proptest::prelude::*;

fn pose(r: f64) -> impl Strategy<Value = Pose2D> {
    (-r..r, -r..r, -PI..PI).prop_map(|(x, y, psi)| Pose2D::new(x, y, psi))
}

fn same_target(a: &PhaseTarget, b: &PhaseTarget) -> bool {
    match (a, b) {
        (PhaseTarget::Heading(x), PhaseTarget::Heading(y)) => angle_diff(*x, *y).abs() <= 1e-9,
        (PhaseTarget::Position(p), PhaseTarget::Position(q)) => {
            (p[0] - q[0]).abs() <= 1e-9 && (p[1] - q[1]).abs() <= 1e-9
        }
        _ => false,
    }
}

fn moved(frame: &Pose2D, t: &PhaseTarget) -> PhaseTarget {
    match *t {
        PhaseTarget::Heading(h) => PhaseTarget::Heading(h + frame.psi),
        PhaseTarget::Position(p) => PhaseTarget::Position(frame.transform_point(p)),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn plan_commutes_with_rigid_motion(
        robot in pose(5.0),
        station_pose in pose(3.0),
        depth in 0.0..0.3f64,
        standoff in 0.3..2.0f64,
        frame in pose(10.0),
    ) {
        let station = DockingStation::new(station_pose, depth).unwrap();
        let (_, real) = compute_docking_points(&station, standoff).unwrap();
        prop_assume!(robot.distance_to(&real) > 0.1);
        let tol = PlanTolerances::default();
        let plan = plan_vpg(&robot, &station, standoff, &tol).unwrap();
        let moved_plan = plan_vpg(&frame.compose(&robot), &station.transformed(&frame), standoff, &tol).unwrap();
        let kinds: Vec<PhaseKind> = plan.phases.iter().map(|p| p.kind).collect();
        prop_assert_eq!(kinds, vec![PhaseKind::Rotate, PhaseKind::Approach, PhaseKind::Rotate2, PhaseKind::Dock]);
        for (a, b) in plan.phases.iter().zip(&moved_plan.phases) {
            prop_assert_eq!(a.kind, b.kind);
            prop_assert!(same_target(&moved(&frame, &a.target), &b.target), "{:?} vs {:?}", a.target, b.target);
        }
        let (v0, v1) = (frame.compose(&plan.virtual_point), moved_plan.virtual_point);
        prop_assert!(v0.distance_to(&v1) <= 1e-9 && angle_diff(v0.psi, v1.psi).abs() <= 1e-9);
    }

    #[test]
    fn docking_points_sit_on_the_axis(station_pose in pose(5.0), depth in 0.0..0.5f64, standoff in 0.1..3.0f64) {
        let station = DockingStation::new(station_pose, depth).unwrap();
        let (virt, real) = compute_docking_points(&station, standoff).unwrap();
        let (ax, ay) = (virt.x - real.x, virt.y - real.y);
        let (fx, fy) = (station_pose.x - real.x, station_pose.y - real.y);
        prop_assert!((ax * fy - ay * fx).abs() <= 1e-9);
        prop_assert!((ax.hypot(ay) - standoff).abs() <= 1e-9);
        prop_assert!(angle_diff(real.psi, station_pose.psi + PI).abs() <= 1e-12);
    }
}
