use std::f64::consts::{PI, TAU};

use crate::controller::LidarScan;
use crate::error::{Error, Result};
use crate::types::Pose2D;

use super::World;

/// Planar scan over the full circle starting at `−π` relative to the heading.
/// Rays hit obstacle footprints and the arena walls.
pub fn lidar_scan(world: &World, pose: &Pose2D, n_rays: usize, max_range: f64) -> Result<LidarScan> {
    if n_rays == 0 {
        return Err(Error::invalid("lidar needs at least one ray"));
    }
    if !(max_range.is_finite() && max_range > 0.0) {
        return Err(Error::invalid("lidar max_range must be positive"));
    }
    let angle_min = -PI;
    let angle_increment = TAU / n_rays as f64;
    let o = pose.position();
    if !world.bounds.contains(o) || world.obstacles.iter().any(|ob| ob.contains(o)) {
        return Ok(LidarScan {
            ranges: vec![0.0; n_rays],
            angle_min,
            angle_increment,
            max_range,
            in_collision: true,
        });
    }
    let ranges = (0..n_rays)
        .map(|i| {
            let a = pose.psi + angle_min + i as f64 * angle_increment;
            let dir = [a.cos(), a.sin()];
            let hit = world
                .obstacles
                .iter()
                .filter_map(|ob| ob.ray_interval(o, dir))
                .filter(|&(_, t1)| t1 >= 0.0)
                .map(|(t0, _)| t0.max(0.0))
                .fold(world.bounds.ray_exit(o, dir), f64::min);
            hit.min(max_range)
        })
        .collect();
    Ok(LidarScan {
        ranges,
        angle_min,
        angle_increment,
        max_range,
        in_collision: false,
    })
}
