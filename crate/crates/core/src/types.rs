//! Planar poses, unit orientation vectors and fixed-length trajectories.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of waypoints in a ground-truth trajectory.
pub const DEFAULT_Q: usize = 32;

/// Tolerance on `c² + s²` for a value to count as a unit orientation.
pub const UNIT_NORM_TOL: f64 = 1e-9;

/// Wrap an angle into `[-π, π]`.
///
/// Exact ±π inputs (and anything congruent to them) map to `+π`.
pub fn wrap_angle(theta: f64) -> Result<f64> {
    if !theta.is_finite() {
        return Err(Error::invalid(format!("angle must be finite, got {theta}")));
    }
    Ok(wrap_unchecked(theta))
}

pub(crate) fn wrap_unchecked(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Signed shortest angular difference `a - b` in `[-π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    wrap_unchecked(a - b)
}

/// Planar pose. `psi` is kept wrapped into `[-π, π]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    pub psi: f64,
}

impl Pose2D {
    pub fn new(x: f64, y: f64, psi: f64) -> Self {
        Pose2D {
            x,
            y,
            psi: wrap_unchecked(psi),
        }
    }

    pub fn try_new(x: f64, y: f64, psi: f64) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::invalid("pose position must be finite"));
        }
        Ok(Pose2D {
            x,
            y,
            psi: wrap_angle(psi)?,
        })
    }

    pub fn position(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    pub fn distance_to(&self, other: &Pose2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Compose `self ∘ local`: interpret `local` in this pose's frame.
    pub fn compose(&self, local: &Pose2D) -> Pose2D {
        let (s, c) = self.psi.sin_cos();
        Pose2D::new(
            self.x + c * local.x - s * local.y,
            self.y + s * local.x + c * local.y,
            self.psi + local.psi,
        )
    }

    /// Express `world` in this pose's frame (inverse of [`Pose2D::compose`]).
    pub fn relative(&self, world: &Pose2D) -> Pose2D {
        let (s, c) = self.psi.sin_cos();
        let dx = world.x - self.x;
        let dy = world.y - self.y;
        Pose2D::new(c * dx + s * dy, -s * dx + c * dy, world.psi - self.psi)
    }

    /// Map a point given in this pose's frame into the parent frame.
    pub fn transform_point(&self, p: [f64; 2]) -> [f64; 2] {
        let (s, c) = self.psi.sin_cos();
        [self.x + c * p[0] - s * p[1], self.y + s * p[0] + c * p[1]]
    }
}

/// Unit heading vector `(cos ψ, sin ψ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientationVec {
    pub c: f64,
    pub s: f64,
}

impl OrientationVec {
    pub fn from_angle(psi: f64) -> Result<Self> {
        orientation_from_angle(psi)
    }

    /// Accept `(c, s)` only if it is unit norm within `tol`.
    pub fn try_new(c: f64, s: f64, tol: f64) -> Result<Self> {
        let n2 = c * c + s * s;
        if !n2.is_finite() || (n2 - 1.0).abs() > tol {
            return Err(Error::invalid(format!(
                "orientation ({c}, {s}) is not unit norm (c²+s² = {n2})"
            )));
        }
        Ok(OrientationVec { c, s })
    }

    /// L2-normalize a raw 2-vector onto the unit circle. A zero (or
    /// non-finite) vector maps to `(1, 0)`.
    pub fn from_raw(x: f64, y: f64) -> Self {
        let n = x.hypot(y);
        if n > 0.0 && n.is_finite() {
            OrientationVec { c: x / n, s: y / n }
        } else {
            OrientationVec { c: 1.0, s: 0.0 }
        }
    }

    pub fn angle(&self) -> f64 {
        self.s.atan2(self.c)
    }

    pub fn norm_sq(&self) -> f64 {
        self.c * self.c + self.s * self.s
    }
}

pub fn orientation_from_angle(psi: f64) -> Result<OrientationVec> {
    if !psi.is_finite() {
        return Err(Error::invalid(format!("angle must be finite, got {psi}")));
    }
    let (s, c) = psi.sin_cos();
    Ok(OrientationVec { c, s })
}

/// `Q` positions paired with `Q` unit headings.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    positions: Vec<[f64; 2]>,
    orientations: Vec<OrientationVec>,
}

impl Trajectory {
    pub fn new(positions: Vec<[f64; 2]>, orientations: Vec<OrientationVec>) -> Result<Self> {
        if positions.len() != orientations.len() {
            return Err(Error::shape(format!(
                "trajectory has {} positions but {} orientations",
                positions.len(),
                orientations.len()
            )));
        }
        if positions.is_empty() {
            return Err(Error::invalid("trajectory must contain at least one point"));
        }
        Ok(Trajectory {
            positions,
            orientations,
        })
    }

    pub fn from_poses(poses: &[Pose2D]) -> Result<Self> {
        let orientations = poses
            .iter()
            .map(|p| orientation_from_angle(p.psi))
            .collect::<Result<Vec<_>>>()?;
        Trajectory::new(poses.iter().map(Pose2D::position).collect(), orientations)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn orientations(&self) -> &[OrientationVec] {
        &self.orientations
    }

    pub fn pose(&self, i: usize) -> Pose2D {
        let p = self.positions[i];
        Pose2D::new(p[0], p[1], self.orientations[i].angle())
    }

    pub fn last_pose(&self) -> Pose2D {
        self.pose(self.len() - 1)
    }

    pub fn poses(&self) -> impl Iterator<Item = Pose2D> + '_ {
        (0..self.len()).map(|i| self.pose(i))
    }

    /// Apply a rigid transform (`frame` composed with every pose).
    pub fn transformed(&self, frame: &Pose2D) -> Trajectory {
        let (s, c) = frame.psi.sin_cos();
        let positions = self.positions.iter().map(|&p| frame.transform_point(p)).collect();
        let orientations = self
            .orientations
            .iter()
            .map(|o| OrientationVec {
                c: c * o.c - s * o.s,
                s: s * o.c + c * o.s,
            })
            .collect();
        Trajectory {
            positions,
            orientations,
        }
    }

    /// Total polyline length of the positions.
    pub fn path_length(&self) -> f64 {
        self.positions
            .windows(2)
            .map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]))
            .sum()
    }
}

/// Forward and yaw-rate command for a differential-drive base.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VelocityCommand {
    /// m/s
    pub v: f64,
    /// rad/s
    pub w: f64,
}

impl VelocityCommand {
    pub const STOP: VelocityCommand = VelocityCommand { v: 0.0, w: 0.0 };

    pub fn new(v: f64, w: f64) -> Self {
        VelocityCommand { v, w }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wrap_examples() {
        assert_eq!(wrap_angle(0.0).unwrap(), 0.0);
        let w = wrap_angle(3.0 * PI).unwrap();
        assert!((w.abs() - PI).abs() < 1e-12, "{w}");
        assert!((wrap_angle(7.0).unwrap() - 0.716_814_692_820_413_5).abs() < 1e-12);
    }

    #[test]
    fn wrap_boundary_maps_to_plus_pi() {
        assert_eq!(wrap_angle(PI).unwrap(), PI);
        assert_eq!(wrap_angle(-PI).unwrap(), PI);
    }

    #[test]
    fn wrap_rejects_non_finite() {
        assert!(wrap_angle(f64::NAN).is_err());
        assert!(wrap_angle(f64::INFINITY).is_err());
        assert!(orientation_from_angle(f64::NEG_INFINITY).is_err());
    }

    #[test]
    fn orientation_examples() {
        let o = orientation_from_angle(0.0).unwrap();
        assert_eq!((o.c, o.s), (1.0, 0.0));
        let o = orientation_from_angle(PI / 2.0).unwrap();
        assert!(o.c.abs() < 1e-15 && (o.s - 1.0).abs() < 1e-15);
        let o = orientation_from_angle(1.0).unwrap();
        assert!((o.c - 0.540_302_305_868_139_7).abs() < 1e-15);
        assert!((o.s - 0.841_470_984_807_896_5).abs() < 1e-15);
    }

    #[test]
    fn raw_normalization() {
        let o = OrientationVec::from_raw(3.0, 4.0);
        assert!((o.c - 0.6).abs() < 1e-15 && (o.s - 0.8).abs() < 1e-15);
        assert_eq!(OrientationVec::from_raw(0.0, 0.0), OrientationVec { c: 1.0, s: 0.0 });
    }

    #[test]
    fn trajectory_rejects_mismatch() {
        let o = OrientationVec { c: 1.0, s: 0.0 };
        assert!(matches!(
            Trajectory::new(vec![[0.0, 0.0]; 2], vec![o]),
            Err(Error::Shape(_))
        ));
        assert!(Trajectory::new(vec![], vec![]).is_err());
    }

    #[test]
    fn compose_relative_inverse() {
        let a = Pose2D::new(1.0, -2.0, 0.7);
        let b = Pose2D::new(-0.3, 4.0, -2.9);
        let r = a.relative(&b);
        let back = a.compose(&r);
        assert!((back.x - b.x).abs() < 1e-12);
        assert!((back.y - b.y).abs() < 1e-12);
        assert!(angle_diff(back.psi, b.psi).abs() < 1e-12);
        assert_eq!(a.relative(&a).position(), [0.0, 0.0]);
    }

    proptest! {
        #[test]
        fn wrap_properties(theta in -1e4f64..1e4) {
            let w = wrap_angle(theta).unwrap();
            prop_assert!(w.abs() <= PI);
            prop_assert!((w.sin() - theta.sin()).abs() < 1e-12);
            prop_assert!((w.cos() - theta.cos()).abs() < 1e-12);
        }

        #[test]
        fn orientation_round_trip(psi in -100.0f64..100.0) {
            let o = orientation_from_angle(psi).unwrap();
            prop_assert!((o.norm_sq() - 1.0).abs() < UNIT_NORM_TOL);
            let back = o.angle();
            let w = wrap_angle(psi).unwrap();
            prop_assert!(angle_diff(back, w).abs() < 1e-12);
        }
    }
}
