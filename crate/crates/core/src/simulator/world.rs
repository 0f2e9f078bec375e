use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planner::DockingStation;
use crate::types::Pose2D;

/// Axis-aligned rectangular arena (m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Bounds {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self> {
        let b = Bounds {
            x_min,
            y_min,
            x_max,
            y_max,
        };
        b.validate()?;
        Ok(b)
    }

    fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.y_min, self.x_max, self.y_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.x_max <= self.x_min || self.y_max <= self.y_min {
            return Err(Error::invalid("bounds must be a finite non-empty rectangle"));
        }
        Ok(())
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        (self.x_min..=self.x_max).contains(&p[0]) && (self.y_min..=self.y_max).contains(&p[1])
    }

    /// Distance from `p` to the nearest wall; negative outside.
    pub fn wall_distance(&self, p: [f64; 2]) -> f64 {
        (p[0] - self.x_min)
            .min(self.x_max - p[0])
            .min(p[1] - self.y_min)
            .min(self.y_max - p[1])
    }

    /// Distance along `dir` (not necessarily unit) at which a ray from inside leaves.
    pub fn ray_exit(&self, o: [f64; 2], dir: [f64; 2]) -> f64 {
        let mut t = f64::INFINITY;
        if dir[0] > 0.0 {
            t = t.min((self.x_max - o[0]) / dir[0]);
        } else if dir[0] < 0.0 {
            t = t.min((self.x_min - o[0]) / dir[0]);
        }
        if dir[1] > 0.0 {
            t = t.min((self.y_max - o[1]) / dir[1]);
        } else if dir[1] < 0.0 {
            t = t.min((self.y_min - o[1]) / dir[1]);
        }
        t.max(0.0)
    }
}

/// Obstacle footprint; extruded vertically for depth rendering.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Obstacle {
    Box { center: [f64; 2], half_extents: [f64; 2] },
    Circle { center: [f64; 2], radius: f64 },
}

impl Obstacle {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Obstacle::Box { center, half_extents } => {
                center.iter().all(|c| c.is_finite()) && half_extents.iter().all(|h| h.is_finite() && *h > 0.0)
            }
            Obstacle::Circle { center, radius } => {
                center.iter().all(|c| c.is_finite()) && radius.is_finite() && *radius > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("degenerate obstacle {self:?}")))
        }
    }

    /// Euclidean distance from `p` to the footprint; 0 inside.
    pub fn distance(&self, p: [f64; 2]) -> f64 {
        match *self {
            Obstacle::Box { center, half_extents } => {
                let dx = ((p[0] - center[0]).abs() - half_extents[0]).max(0.0);
                let dy = ((p[1] - center[1]).abs() - half_extents[1]).max(0.0);
                dx.hypot(dy)
            }
            Obstacle::Circle { center, radius } => ((p[0] - center[0]).hypot(p[1] - center[1]) - radius).max(0.0),
        }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        match *self {
            Obstacle::Box { center, half_extents } => {
                (p[0] - center[0]).abs() <= half_extents[0] && (p[1] - center[1]).abs() <= half_extents[1]
            }
            Obstacle::Circle { center, radius } => (p[0] - center[0]).hypot(p[1] - center[1]) <= radius,
        }
    }

    /// Parameter interval `[t_in, t_out]` over which the ray `o + t·dir`
    /// overlaps the footprint, if any (t may be negative).
    pub fn ray_interval(&self, o: [f64; 2], dir: [f64; 2]) -> Option<(f64, f64)> {
        match *self {
            Obstacle::Box { center, half_extents } => {
                let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
                for k in 0..2 {
                    let lo = center[k] - half_extents[k];
                    let hi = center[k] + half_extents[k];
                    if dir[k] == 0.0 {
                        if o[k] < lo || o[k] > hi {
                            return None;
                        }
                    } else {
                        let a = (lo - o[k]) / dir[k];
                        let b = (hi - o[k]) / dir[k];
                        t0 = t0.max(a.min(b));
                        t1 = t1.min(a.max(b));
                    }
                }
                (t0 <= t1).then_some((t0, t1))
            }
            Obstacle::Circle { center, radius } => {
                let (fx, fy) = (o[0] - center[0], o[1] - center[1]);
                let a = dir[0] * dir[0] + dir[1] * dir[1];
                if a == 0.0 {
                    return None;
                }
                let b = fx * dir[0] + fy * dir[1];
                let c = fx * fx + fy * fy - radius * radius;
                let disc = b * b - a * c;
                if disc < 0.0 {
                    return None;
                }
                let sq = disc.sqrt();
                Some(((-b - sq) / a, (-b + sq) / a))
            }
        }
    }

    /// Closed polyline tracing the footprint (boxes: 4 corners, circles: `segments`).
    pub fn outline(&self, segments: usize) -> Vec<[f64; 2]> {
        let mut pts: Vec<[f64; 2]> = match *self {
            Obstacle::Box {
                center: c,
                half_extents: h,
            } => vec![
                [c[0] - h[0], c[1] - h[1]],
                [c[0] + h[0], c[1] - h[1]],
                [c[0] + h[0], c[1] + h[1]],
                [c[0] - h[0], c[1] + h[1]],
            ],
            Obstacle::Circle { center: c, radius: r } => (0..segments.max(3))
                .map(|i| {
                    let a = TAU * i as f64 / segments.max(3) as f64;
                    [c[0] + r * a.cos(), c[1] + r * a.sin()]
                })
                .collect(),
        };
        pts.push(pts[0]);
        pts
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct World {
    pub bounds: Bounds,
    pub station: DockingStation,
    #[serde(default)]
    pub obstacles: Vec<Obstacle>,
}

impl World {
    pub fn new(bounds: Bounds, station: DockingStation, obstacles: Vec<Obstacle>) -> Result<Self> {
        let w = World {
            bounds,
            station,
            obstacles,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        self.bounds.validate()?;
        if !self.bounds.contains(self.station.pose.position()) {
            return Err(Error::invalid("station must lie inside the bounds"));
        }
        if !(self.station.dock_depth.is_finite() && self.station.dock_depth >= 0.0) {
            return Err(Error::invalid("dock_depth must be non-negative"));
        }
        self.obstacles.iter().try_for_each(Obstacle::validate)
    }

    /// Distance from `p` to the nearest obstacle or wall (0 inside an obstacle,
    /// negative outside the bounds). The station is not an obstacle.
    pub fn clearance(&self, p: [f64; 2]) -> f64 {
        self.obstacles
            .iter()
            .map(|o| o.distance(p))
            .fold(self.bounds.wall_distance(p), f64::min)
    }

    /// Whether a disc of `radius` centred on the pose overlaps anything.
    pub fn in_collision(&self, pose: &Pose2D, radius: f64) -> bool {
        self.clearance(pose.position()) < radius
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn world(obstacles: Vec<Obstacle>) -> World {
        let st = DockingStation::new(Pose2D::default(), 0.0).unwrap();
        World::new(Bounds::new(-5.0, -5.0, 5.0, 5.0).unwrap(), st, obstacles).unwrap()
    }

    #[test]
    fn clearance_takes_nearest_feature() {
        let w = world(vec![
            Obstacle::Circle {
                center: [2.0, 0.0],
                radius: 0.5,
            },
            Obstacle::Box {
                center: [0.0, 3.0],
                half_extents: [1.0, 0.5],
            },
        ]);
        assert!((w.clearance([0.0, 0.0]) - 1.5).abs() < 1e-12);
        assert!((w.clearance([4.5, 0.0]) - 0.5).abs() < 1e-12);
        assert_eq!(w.clearance([0.0, 3.2]), 0.0);
        assert!(w.clearance([6.0, 0.0]) < 0.0);
    }

    #[test]
    fn box_ray_interval() {
        let b = Obstacle::Box {
            center: [3.0, 0.0],
            half_extents: [0.5, 1.0],
        };
        let (t0, t1) = b.ray_interval([0.0, 0.0], [1.0, 0.0]).unwrap();
        assert_eq!((t0, t1), (2.5, 3.5));
        assert!(b.ray_interval([0.0, 0.0], [0.0, 1.0]).is_none());
    }

    #[test]
    fn circle_ray_interval() {
        let c = Obstacle::Circle {
            center: [3.0, 0.0],
            radius: 0.5,
        };
        let (t0, t1) = c.ray_interval([0.0, 0.0], [1.0, 0.0]).unwrap();
        assert!((t0 - 2.5).abs() < 1e-12 && (t1 - 3.5).abs() < 1e-12);
    }

    #[test]
    fn degenerate_obstacles_rejected() {
        let st = DockingStation::new(Pose2D::default(), 0.0).unwrap();
        let b = Bounds::new(-1.0, -1.0, 1.0, 1.0).unwrap();
        assert!(World::new(
            b,
            st,
            vec![Obstacle::Circle {
                center: [0.0, 0.0],
                radius: 0.0
            }]
        )
        .is_err());
        let outside = DockingStation::new(Pose2D::new(3.0, 0.0, 0.0), 0.0).unwrap();
        assert!(World::new(b, outside, vec![]).is_err());
        assert!(Bounds::new(1.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn outlines_are_closed() {
        let c = Obstacle::Circle {
            center: [0.0, 0.0],
            radius: 1.0,
        };
        let o = c.outline(16);
        assert_eq!(o.len(), 17);
        assert_eq!(o[0], o[16]);
        let b = Obstacle::Box {
            center: [0.0, 0.0],
            half_extents: [1.0, 2.0],
        };
        assert_eq!(b.outline(16).len(), 5);
    }
}
