use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planner::{compute_docking_points, DockingStation};
use crate::types::Pose2D;

use super::{Bounds, Obstacle, World};

/// Randomized docking scenarios: station at the origin facing +x, start pose
/// uniform over an annulus around it, a few obstacles kept off the docking axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WorldGenConfig {
    /// Arena is `[-half_extent, half_extent]²` (m).
    pub half_extent: f64,
    pub annulus_min: f64,
    pub annulus_max: f64,
    pub obstacles_min: usize,
    pub obstacles_max: usize,
    /// Minimum gap between an obstacle and the real→virtual docking segment (m).
    pub axis_clearance: f64,
    /// Circle radii and box half-extents are drawn from this range (m).
    pub obstacle_size: [f64; 2],
    /// Extra gap beyond the robot radius kept around the start pose (m).
    pub start_margin: f64,
}

impl Default for WorldGenConfig {
    fn default() -> Self {
        WorldGenConfig {
            half_extent: 6.0,
            annulus_min: 1.5,
            annulus_max: 5.0,
            obstacles_min: 0,
            obstacles_max: 4,
            axis_clearance: 0.8,
            obstacle_size: [0.2, 0.6],
            start_margin: 0.3,
        }
    }
}

impl WorldGenConfig {
    pub fn obstacle_free() -> Self {
        WorldGenConfig {
            obstacles_max: 0,
            ..WorldGenConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.obstacle_size;
        let ok = self.half_extent > 0.0
            && 0.0 < self.annulus_min
            && self.annulus_min <= self.annulus_max
            && self.obstacles_min <= self.obstacles_max
            && self.axis_clearance >= 0.0
            && 0.0 < lo
            && lo <= hi
            && self.start_margin >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "inconsistent world generator settings {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub world: World,
    pub start: Pose2D,
}

const MAX_TRIES: usize = 1000;

/// Distance from the segment `a→b` to the obstacle footprint. The footprint
/// distance is convex along a line, so a ternary search finds the minimum.
fn segment_distance(ob: &Obstacle, a: [f64; 2], b: [f64; 2]) -> f64 {
    let at = |s: f64| ob.distance([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]);
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..100 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if at(m1) <= at(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    at(0.5 * (lo + hi)).min(at(0.0)).min(at(1.0))
}

pub fn generate_scenario(
    cfg: &WorldGenConfig,
    robot_radius: f64,
    standoff: f64,
    rng: &mut impl Rng,
) -> Result<Scenario> {
    cfg.validate()?;
    let h = cfg.half_extent;
    let bounds = Bounds::new(-h, -h, h, h)?;
    let station = DockingStation::new(Pose2D::default(), 0.0)?;
    let (virt, real) = compute_docking_points(&station, standoff)?;
    let keep_clear = robot_radius + cfg.start_margin;

    let start = (0..MAX_TRIES)
        .map(|_| {
            let r = rng
                .random_range(cfg.annulus_min.powi(2)..=cfg.annulus_max.powi(2))
                .sqrt();
            let a = rng.random_range(-PI..PI);
            Pose2D::new(r * a.cos(), r * a.sin(), rng.random_range(-PI..PI))
        })
        .find(|p| bounds.wall_distance(p.position()) >= keep_clear)
        .ok_or_else(|| Error::invalid("annulus does not fit inside the arena"))?;

    let n = rng.random_range(cfg.obstacles_min..=cfg.obstacles_max);
    let [lo, hi] = cfg.obstacle_size;
    let mut obstacles = Vec::with_capacity(n);
    for _ in 0..n {
        for _ in 0..MAX_TRIES {
            let center = [rng.random_range(-h..h), rng.random_range(-h..h)];
            let ob = if rng.random_bool(0.5) {
                Obstacle::Circle {
                    center,
                    radius: rng.random_range(lo..=hi),
                }
            } else {
                Obstacle::Box {
                    center,
                    half_extents: [rng.random_range(lo..=hi), rng.random_range(lo..=hi)],
                }
            };
            if ob.distance(start.position()) >= keep_clear
                && segment_distance(&ob, real.position(), virt.position()) >= cfg.axis_clearance
            {
                obstacles.push(ob);
                break;
            }
        }
    }
    Ok(Scenario {
        world: World::new(bounds, station, obstacles)?,
        start,
    })
}
