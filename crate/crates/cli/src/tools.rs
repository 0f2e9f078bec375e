use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use dockkit_core::config::{GlobalConfig, Sampling};
use dockkit_core::dataset::{format_real, parse_toml, read_text};
use dockkit_core::geometry::{
    backproject as backproject_depth, build_direction_matrix, farthest_point_sample, transform_to_body,
    voxel_downsample, CameraIntrinsics, DepthImage,
};
use dockkit_core::planner::{DockingStation, PhaseTarget};
use dockkit_core::simulator::camera_extrinsics;
use dockkit_core::{plan_vpg, Pose2D};

use crate::invalid;

#[derive(Debug, clap::Args)]
pub struct BackprojectArgs {
    /// 16-bit binary PGM depth image.
    #[arg(long)]
    pub depth: PathBuf,
    /// TOML file with fx, fy, cx, cy, width, height and optional distortion.
    #[arg(long)]
    pub intrinsics: PathBuf,
    /// Raw depth units per meter.
    #[arg(long, default_value_t = 1000.0)]
    pub depth_scale: f64,
    /// Pixel stride per axis (defaults to `geometry.stride`).
    #[arg(long)]
    pub stride: Option<usize>,
    /// Emit body-frame points for a forward-looking camera at this height (m).
    #[arg(long)]
    pub mount_height: Option<f64>,
}

/// Writes one `x y z` line per point (meters), to `out` or stdout.
pub fn backproject(cfg: &GlobalConfig, args: &BackprojectArgs, out: Option<&Path>) -> Result<()> {
    let intr: CameraIntrinsics = parse_toml(&read_text(&args.intrinsics)?, &args.intrinsics)?;
    intr.validate()?;
    let depth = DepthImage::load_pgm(&args.depth, args.depth_scale)?;
    if (depth.width(), depth.height()) != (intr.width, intr.height) {
        return Err(invalid(format!(
            "depth image is {}x{} but intrinsics describe {}x{}",
            depth.width(),
            depth.height(),
            intr.width,
            intr.height
        )));
    }
    let g = &cfg.geometry;
    let dm = build_direction_matrix(&intr, g.undistort)?;
    let mut cloud = backproject_depth(&dm, &depth, args.stride.unwrap_or(g.stride))?;
    if let Some(h) = args.mount_height {
        cloud = transform_to_body(&cloud, &camera_extrinsics(h))?;
    }
    cloud = match g.sampling {
        Sampling::None => cloud,
        Sampling::Fps => farthest_point_sample(&cloud, g.fps_points.min(cloud.len()))?,
        Sampling::Voxel => voxel_downsample(&cloud, g.voxel_size)?,
    };
    let mut text = String::new();
    for p in &cloud.points {
        writeln!(text, "{} {} {}", format_real(p.x), format_real(p.y), format_real(p.z))?;
    }
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn parse_pose(s: &str) -> Result<Pose2D, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [x, y, psi] => Pose2D::try_new(x, y, psi).map_err(|e| e.to_string()),
        _ => Err(format!("expected x,y,psi but got {s:?}")),
    }
}

#[derive(Debug, clap::Args)]
pub struct PlanArgs {
    /// Robot pose `x,y,psi` (m, m, rad).
    #[arg(long, value_parser = parse_pose, allow_hyphen_values = true)]
    pub robot: Pose2D,
    /// Station face pose `x,y,psi`; psi points out of the dock.
    #[arg(long, value_parser = parse_pose, allow_hyphen_values = true)]
    pub station: Pose2D,
    /// Distance from the face back to the physical docking point (m).
    #[arg(long, default_value_t = 0.0)]
    pub dock_depth: f64,
}

fn fmt_pose(p: &Pose2D) -> String {
    format!("x={:.6} y={:.6} psi={:.6}", p.x, p.y, p.psi)
}

pub fn plan(cfg: &GlobalConfig, args: &PlanArgs) -> Result<()> {
    let station = DockingStation::new(args.station, args.dock_depth)?;
    let plan = plan_vpg(&args.robot, &station, cfg.sim.standoff, &cfg.sim.tolerances)?;
    println!("virtual_point {}", fmt_pose(&plan.virtual_point));
    println!("real_point    {}", fmt_pose(&plan.real_point));
    for (i, phase) in plan.phases.iter().enumerate() {
        let target = match phase.target {
            PhaseTarget::Heading(h) => format!("heading={h:.6}"),
            PhaseTarget::Position(p) => format!("position=({:.6}, {:.6})", p[0], p[1]),
        };
        let done = if phase.satisfied_at_start {
            " (already satisfied)"
        } else {
            ""
        };
        println!(
            "phase {} {:<8} {target} tolerance={:.6}{done}",
            i + 1,
            format!("{:?}", phase.kind),
            phase.tolerance
        );
    }
    Ok(())
}
