use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::controller::{dwa_step, DwaConfig, RobotState};
use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, DEFAULT_DEPTH_SCALE};
use crate::metrics::FDOE_THRESHOLD_DEG;
use crate::planner::{plan_vpg, PhaseTarget, PlanTolerances, DEFAULT_STANDOFF};
use crate::record::{EpisodeRecord, EpisodeStatus, RawLog, Source};
use crate::types::{angle_diff, Pose2D, VelocityCommand, DEFAULT_Q};

use super::{lidar_scan, render_depth, resample_trajectory, step_kinematics, World};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LidarConfig {
    pub n_rays: usize,
    /// m
    pub max_range: f64,
}

impl Default for LidarConfig {
    fn default() -> Self {
        LidarConfig {
            n_rays: 360,
            max_range: 8.0,
        }
    }
}

/// Depth camera looking along the robot heading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CameraRig {
    pub intrinsics: CameraIntrinsics,
    /// m above the ground
    pub mount_height: f64,
    /// sensor units per meter
    pub depth_scale: f64,
}

impl Default for CameraRig {
    fn default() -> Self {
        CameraRig {
            intrinsics: CameraIntrinsics {
                fx: 64.0,
                fy: 64.0,
                cx: 64.0,
                cy: 64.0,
                width: 128,
                height: 128,
                distortion: None,
            },
            mount_height: 0.3,
            depth_scale: DEFAULT_DEPTH_SCALE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EpisodeConfig {
    /// World-frame start pose; the log is expressed relative to it.
    pub start_pose: Pose2D,
    /// Pose records per second.
    pub log_hz: f64,
    /// s
    pub max_duration: f64,
    /// Virtual-point standoff (m).
    pub standoff: f64,
    /// Waypoints in the resampled trajectory.
    pub q_points: usize,
    pub seed: u64,
    pub tolerances: PlanTolerances,
    /// Proportional yaw gain for rotation phases (1/s).
    pub yaw_gain: f64,
    /// Approach speed is capped at `approach_gain · distance` near the goal (1/s).
    pub approach_gain: f64,
    pub dwa: DwaConfig,
    pub lidar: LidarConfig,
    pub camera: CameraRig,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        EpisodeConfig {
            start_pose: Pose2D::default(),
            log_hz: 10.0,
            max_duration: 60.0,
            standoff: DEFAULT_STANDOFF,
            q_points: DEFAULT_Q,
            seed: 0,
            tolerances: PlanTolerances::default(),
            yaw_gain: 2.0,
            approach_gain: 0.5,
            dwa: DwaConfig::default(),
            lidar: LidarConfig::default(),
            camera: CameraRig::default(),
        }
    }
}

impl EpisodeConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be positive, got {v}")))
            }
        };
        positive("log_hz", self.log_hz)?;
        positive("max_duration", self.max_duration)?;
        positive("standoff", self.standoff)?;
        positive("yaw_gain", self.yaw_gain)?;
        positive("approach_gain", self.approach_gain)?;
        positive("tolerances.position", self.tolerances.position)?;
        positive("tolerances.heading", self.tolerances.heading)?;
        positive("camera.mount_height", self.camera.mount_height)?;
        positive("camera.depth_scale", self.camera.depth_scale)?;
        positive("lidar.max_range", self.lidar.max_range)?;
        if self.q_points < 2 {
            return Err(Error::invalid("q_points must be at least 2"));
        }
        if self.lidar.n_rays == 0 {
            return Err(Error::invalid("lidar.n_rays must be positive"));
        }
        Pose2D::try_new(self.start_pose.x, self.start_pose.y, self.start_pose.psi)?;
        self.camera.intrinsics.validate()?;
        self.dwa.validate()
    }

    /// Meters of path that one radian of turning counts as when resampling.
    pub fn rotation_scale(&self) -> f64 {
        self.dwa.v_max / self.dwa.w_max
    }
}

/// Rate-limited proportional yaw command toward `target`, without translation.
fn yaw_command(state: &RobotState, target: f64, cfg: &EpisodeConfig) -> VelocityCommand {
    let d = &cfg.dwa;
    let err = angle_diff(target, state.pose.psi);
    let mag = d
        .w_max
        .min((2.0 * d.a_w * err.abs()).sqrt())
        .min(cfg.yaw_gain * err.abs());
    let w = (mag * err.signum()).clamp(state.w - d.a_w * d.dt, state.w + d.a_w * d.dt);
    VelocityCommand::new(0.0, w.clamp(-d.w_max, d.w_max))
}

/// DWA toward `goal` with the top speed tapered so the robot can stop on it
/// and short rollouts never overshoot it.
fn approach_command(world: &World, state: &RobotState, goal: [f64; 2], cfg: &EpisodeConfig) -> Result<VelocityCommand> {
    let d = &cfg.dwa;
    let dist = (goal[0] - state.pose.x).hypot(goal[1] - state.pose.y);
    let cap = d.v_max.min((2.0 * d.a_v * dist).sqrt()).min(cfg.approach_gain * dist);
    let local = DwaConfig {
        v_max: cap.max(d.v_min + 1e-6),
        ..*d
    };
    let scan = lidar_scan(world, &state.pose, cfg.lidar.n_rays, cfg.lidar.max_range)?;
    Ok(dwa_step(state, &Pose2D::new(goal[0], goal[1], 0.0), &scan, &local))
}

/// Run the VPG + DWA stack from `cfg.start_pose` until docked, timed out or
/// collided, logging poses at `cfg.log_hz` in the start frame.
pub fn run_episode(world: &World, cfg: &EpisodeConfig) -> Result<EpisodeRecord> {
    cfg.validate()?;
    world.validate()?;
    let start = cfg.start_pose;
    let radius = cfg.dwa.robot_radius;
    if world.in_collision(&start, radius) {
        return Err(Error::RejectedEpisode(format!(
            "start pose ({:.3}, {:.3}) is within {radius} m of an obstacle",
            start.x, start.y
        )));
    }
    let cam = &cfg.camera;
    let depth = render_depth(world, &start, &cam.intrinsics, cam.mount_height, cam.depth_scale)?;
    let plan = plan_vpg(&start, &world.station, cfg.standoff, &cfg.tolerances)?;
    let dock_heading_tol = FDOE_THRESHOLD_DEG.to_radians();

    let dt = cfg.dwa.dt;
    let log_dt = 1.0 / cfg.log_hz;
    let max_ticks = (cfg.max_duration / dt - 1e-9).ceil().max(1.0) as usize;
    let mut state = RobotState::at(start);
    let mut phase = plan.first_active_phase();
    let mut samples = vec![(0.0, Pose2D::default())];
    let mut next_log = 1usize;
    let mut tick = 0usize;
    // Set once the robot reaches the real point misaligned; it then turns in
    // place down to the plan's heading tolerance.
    let mut aligning = false;

    let status = loop {
        while phase < 3 && plan.phases[phase].is_satisfied(&state.pose) {
            phase += 1;
        }
        let at_real = plan.phases[3].is_satisfied(&state.pose);
        if phase == 3 && at_real {
            let err = angle_diff(plan.docking_heading(), state.pose.psi).abs();
            let tol = if aligning {
                cfg.tolerances.heading
            } else {
                dock_heading_tol
            };
            if err < tol {
                break EpisodeStatus::Docked;
            }
            aligning = true;
        }
        if tick >= max_ticks {
            break EpisodeStatus::Timeout;
        }

        let cmd = match (phase, plan.phases[phase].target) {
            (3, _) if at_real => yaw_command(&state, plan.docking_heading(), cfg),
            (_, PhaseTarget::Heading(h)) => yaw_command(&state, h, cfg),
            (_, PhaseTarget::Position(p)) => approach_command(world, &state, p, cfg)?,
        };

        let t0 = tick as f64 * dt;
        let t1 = (tick + 1) as f64 * dt;
        let next = step_kinematics(&state, &cmd, dt);
        loop {
            let tl = next_log as f64 * log_dt;
            if tl > t1 + 1e-9 {
                break;
            }
            let pose = if (tl - t1).abs() <= 1e-9 {
                next.pose
            } else {
                step_kinematics(&state, &cmd, (tl - t0).max(0.0)).pose
            };
            samples.push((tl, start.relative(&pose)));
            next_log += 1;
        }
        state = next;
        tick += 1;
        if world.in_collision(&state.pose, radius) {
            break EpisodeStatus::Collision;
        }
    };

    // The robot halts at termination; make sure the log ends on the final pose.
    let t_end = tick as f64 * dt;
    if samples[samples.len() - 1].0 < t_end - 1e-9 {
        samples.push((next_log as f64 * log_dt, start.relative(&state.pose)));
    }
    let raw_log = RawLog::new(samples)?;
    let gt_trajectory = resample_trajectory(&raw_log, cfg.q_points, cfg.rotation_scale())?;

    Ok(EpisodeRecord {
        status,
        source: Source::RuleBased,
        config: cfg.clone(),
        world: world.clone(),
        intrinsics: cam.intrinsics,
        depth,
        depth_ref: PathBuf::from("depth.pgm"),
        rgb_ref: None,
        raw_log,
        gt_trajectory,
    })
}
