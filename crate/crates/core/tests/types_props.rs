use std::f64::consts::PI;

use dockkit_core::types::{orientation_from_angle, wrap_angle, OrientationVec, Pose2D, Trajectory};
use proptest::prelude::*;

proptest! {
    #[test]
    fn wrap_is_bounded_and_preserves_direction(theta in -1e4..1e4f64) {
        let w = wrap_angle(theta).unwrap();
        prop_assert!(w.abs() <= PI);
        prop_assert!((w.sin() - theta.sin()).abs() <= 1e-12);
        prop_assert!((w.cos() - theta.cos()).abs() <= 1e-12);
    }

    #[test]
    fn orientation_round_trip(psi in -50.0..50.0f64) {
        let o = orientation_from_angle(psi).unwrap();
        prop_assert!((o.c * o.c + o.s * o.s - 1.0).abs() <= 1e-9);
        let back = o.s.atan2(o.c);
        let want = wrap_angle(psi).unwrap();
        // atan2 returns -π where wrapping picks +π; both name the same heading.
        let d = (back - want).abs();
        prop_assert!(d <= 1e-12 || (d - 2.0 * PI).abs() <= 1e-12);
    }

    #[test]
    fn pose_compose_relative_inverse(a in prop::array::uniform3(-5.0..5.0f64), b in prop::array::uniform3(-5.0..5.0f64)) {
        let frame = Pose2D::new(a[0], a[1], a[2]);
        let local = Pose2D::new(b[0], b[1], b[2]);
        let back = frame.relative(&frame.compose(&local));
        prop_assert!((back.x - local.x).abs() <= 1e-9 && (back.y - local.y).abs() <= 1e-9);
        prop_assert!((back.psi - local.psi).sin().abs() <= 1e-9);
    }

    #[test]
    fn mismatched_lengths_are_rejected(n in 1usize..10, m in 1usize..10) {
        let t = Trajectory::new(vec![[0.0, 0.0]; n], vec![OrientationVec::from_angle(0.0).unwrap(); m]);
        prop_assert_eq!(t.is_ok(), n == m);
    }
}

#[test]
fn wrap_boundary_and_non_finite() {
    assert_eq!(wrap_angle(PI).unwrap(), PI);
    assert_eq!(wrap_angle(-PI).unwrap(), PI);
    assert!(wrap_angle(f64::NAN).is_err());
    assert!(wrap_angle(f64::INFINITY).is_err());
}
