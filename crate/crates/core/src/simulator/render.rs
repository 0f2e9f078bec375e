use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::geometry::{build_direction_matrix, CameraIntrinsics, DepthImage, ExtrinsicTransform};
use crate::types::Pose2D;

use super::{Obstacle, World};

/// Extrusion height of obstacles and arena walls (m).
pub const OBSTACLE_HEIGHT: f64 = 1.0;

// Station body: a box behind the docking face.
const STATION_DEPTH: f64 = 0.3;
const STATION_HALF_WIDTH: f64 = 0.3;
const STATION_HEIGHT: f64 = 0.4;

/// Camera-to-body transform for a forward-looking camera at `mount_height`
/// (camera z forward, x right, y down; body x forward, y left, z up).
pub fn camera_extrinsics(mount_height: f64) -> ExtrinsicTransform {
    let r = Matrix3::new(0.0, 0.0, 1.0, -1.0, 0.0, 0.0, 0.0, -1.0, 0.0);
    ExtrinsicTransform::new(r, Vector3::new(0.0, 0.0, mount_height)).expect("constant rotation is proper")
}

/// First parameter at which the ray (2D part `o + t·d`, height `h − dy·t`)
/// hits a prism of the given footprint extruded over `[0, top]`.
fn prism_hit(fp: &Obstacle, o: [f64; 2], d: [f64; 2], h: f64, dy: f64, top: f64) -> Option<f64> {
    let (t0, t1) = fp.ray_interval(o, d)?;
    if t1 < 0.0 {
        return None;
    }
    let t0 = t0.max(0.0);
    let z0 = h - dy * t0;
    if (0.0..=top).contains(&z0) {
        return Some(t0);
    }
    if z0 > top && dy > 0.0 {
        let t_top = (h - top) / dy;
        if t_top >= t0 && t_top <= t1 {
            return Some(t_top);
        }
    }
    None
}

/// Ray-cast a depth image from a camera mounted at `mount_height` on a robot
/// at `pose`, looking along the heading. Depth is the camera-frame z of the
/// first hit (ground, obstacles, walls, station body); no hit gives 0, as do
/// depths beyond the 16-bit range.
pub fn render_depth(
    world: &World,
    pose: &Pose2D,
    intr: &CameraIntrinsics,
    mount_height: f64,
    depth_scale: f64,
) -> Result<DepthImage> {
    if !(mount_height.is_finite() && mount_height > 0.0) {
        return Err(Error::invalid("mount_height must be positive"));
    }
    let dm = build_direction_matrix(intr, true)?;
    let mut img = DepthImage::zeros(intr.width, intr.height, depth_scale)?;
    let (s, c) = pose.psi.sin_cos();
    let o = pose.position();
    let h = mount_height;

    let st = &world.station.pose;
    let st_o = st.relative(&Pose2D::new(o[0], o[1], 0.0)).position();
    let (ss, sc) = st.psi.sin_cos();
    let station_fp = Obstacle::Box {
        center: [-STATION_DEPTH / 2.0, 0.0],
        half_extents: [STATION_DEPTH / 2.0, STATION_HALF_WIDTH],
    };

    for v in 0..intr.height {
        for u in 0..intr.width {
            let ray = dm.direction(u, v);
            // Horizontal direction for a camera-frame ray (x right, y down, z forward).
            let d = [ray.z * c + ray.x * s, ray.z * s - ray.x * c];
            let dy = ray.y;
            let mut best = f64::INFINITY;
            if dy > 0.0 {
                best = h / dy;
            }
            for ob in &world.obstacles {
                if let Some(t) = prism_hit(ob, o, d, h, dy, OBSTACLE_HEIGHT) {
                    best = best.min(t);
                }
            }
            let t_wall = world.bounds.ray_exit(o, d);
            if t_wall.is_finite() && (0.0..=OBSTACLE_HEIGHT).contains(&(h - dy * t_wall)) {
                best = best.min(t_wall);
            }
            let d_st = [sc * d[0] + ss * d[1], -ss * d[0] + sc * d[1]];
            if let Some(t) = prism_hit(&station_fp, st_o, d_st, h, dy, STATION_HEIGHT) {
                best = best.min(t);
            }
            if best.is_finite() {
                let raw = (best * depth_scale).round();
                if raw >= 1.0 && raw <= f64::from(u16::MAX) {
                    img.set(u, v, raw as u16);
                }
            }
        }
    }
    Ok(img)
}
