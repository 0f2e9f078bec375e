//! Dynamic Window Approach velocity selection.
//!
//! Candidates are sampled on a `samples_v × samples_w` grid over the
//! acceleration-bounded window around the current velocity, rolled out at
//! constant velocity, filtered for clearance against the scan, and scored by
//! a weighted sum of min-max normalized heading, clearance and speed terms.
//! Candidate order is v-major; ties resolve to the lowest index.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::step_kinematics;
use crate::types::{angle_diff, Pose2D, VelocityCommand};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreWeights {
    pub heading: f64,
    pub clearance: f64,
    pub velocity: f64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        ScoreWeights {
            heading: 0.6,
            clearance: 0.25,
            velocity: 0.15,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DwaConfig {
    pub v_max: f64,
    pub v_min: f64,
    pub w_max: f64,
    /// m/s²
    pub a_v: f64,
    /// rad/s²
    pub a_w: f64,
    /// Control period (s).
    pub dt: f64,
    /// Rollout length (s).
    pub horizon: f64,
    pub samples_v: usize,
    pub samples_w: usize,
    pub weights: ScoreWeights,
    pub robot_radius: f64,
    /// Extra clearance beyond `robot_radius` a rollout must keep (m).
    pub safety_margin: f64,
}

impl Default for DwaConfig {
    fn default() -> Self {
        DwaConfig {
            v_max: 1.0,
            v_min: 0.0,
            w_max: 1.5,
            a_v: 1.0,
            a_w: 2.0,
            dt: 0.1,
            horizon: 1.5,
            samples_v: 11,
            samples_w: 21,
            weights: ScoreWeights::default(),
            robot_radius: 0.35,
            safety_margin: 0.05,
        }
    }
}

impl DwaConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(format!("dwa.{name} must be positive, got {v}")))
            }
        };
        if !(self.v_max.is_finite() && self.v_min.is_finite() && self.v_max > self.v_min) {
            return Err(Error::invalid("dwa.v_max must exceed dwa.v_min"));
        }
        pos("w_max", self.w_max)?;
        pos("a_v", self.a_v)?;
        pos("a_w", self.a_w)?;
        pos("dt", self.dt)?;
        pos("horizon", self.horizon)?;
        pos("robot_radius", self.robot_radius)?;
        if self.samples_v == 0 || self.samples_w == 0 {
            return Err(Error::invalid("dwa sample counts must be positive"));
        }
        let w = self.weights;
        if [w.heading, w.clearance, w.velocity]
            .iter()
            .any(|x| !(x.is_finite() && *x >= 0.0))
        {
            return Err(Error::invalid("dwa weights must be non-negative"));
        }
        if !(self.safety_margin.is_finite() && self.safety_margin >= 0.0) {
            return Err(Error::invalid("dwa.safety_margin must be non-negative"));
        }
        Ok(())
    }

    /// Minimum obstacle distance an admissible rollout keeps.
    pub fn min_clearance(&self) -> f64 {
        self.robot_radius + self.safety_margin
    }

    /// Distance at which the clearance score saturates.
    pub fn clearance_cap(&self) -> f64 {
        3.0 * self.robot_radius
    }

    pub fn rollout_steps(&self) -> usize {
        ((self.horizon / self.dt).round() as usize).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RobotState {
    pub pose: Pose2D,
    pub v: f64,
    pub w: f64,
}

impl RobotState {
    pub fn at(pose: Pose2D) -> Self {
        RobotState { pose, v: 0.0, w: 0.0 }
    }
}

/// Planar range scan; ray `i` points at `pose.psi + angle_min + i·angle_increment`.
#[derive(Debug, Clone, PartialEq)]
pub struct LidarScan {
    pub ranges: Vec<f64>,
    pub angle_min: f64,
    pub angle_increment: f64,
    pub max_range: f64,
    /// The sensor origin was inside an obstacle; ranges are all zero.
    pub in_collision: bool,
}

impl LidarScan {
    /// World-frame hit points of every ray that returned before `max_range`.
    pub fn obstacle_points(&self, pose: &Pose2D) -> Vec<[f64; 2]> {
        self.ranges
            .iter()
            .enumerate()
            .filter(|(_, &r)| r < self.max_range)
            .map(|(i, &r)| {
                let a = pose.psi + self.angle_min + i as f64 * self.angle_increment;
                [pose.x + r * a.cos(), pose.y + r * a.sin()]
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub v_lo: f64,
    pub v_hi: f64,
    pub w_lo: f64,
    pub w_hi: f64,
}

impl Window {
    pub fn contains(&self, cmd: &VelocityCommand) -> bool {
        (self.v_lo..=self.v_hi).contains(&cmd.v) && (self.w_lo..=self.w_hi).contains(&cmd.w)
    }
}

/// Velocities reachable within one control period. If the current velocity
/// is outside the limits the window collapses onto the nearest reachable value.
pub fn dynamic_window(state: &RobotState, cfg: &DwaConfig) -> Window {
    let v_lo = cfg.v_min.max(state.v - cfg.a_v * cfg.dt);
    let v_hi = cfg.v_max.min(state.v + cfg.a_v * cfg.dt).max(v_lo);
    let w_lo = (-cfg.w_max).max(state.w - cfg.a_w * cfg.dt);
    let w_hi = cfg.w_max.min(state.w + cfg.a_w * cfg.dt).max(w_lo);
    Window { v_lo, v_hi, w_lo, w_hi }
}

/// Constant-velocity rollout; returns the poses after each of `horizon/dt` steps.
pub fn rollout(state: &RobotState, v: f64, w: f64, dt: f64, horizon: f64) -> Vec<Pose2D> {
    let steps = ((horizon / dt).round() as usize).max(1);
    let cmd = VelocityCommand::new(v, w);
    let mut s = *state;
    (0..steps)
        .map(|_| {
            s = step_kinematics(&s, &cmd, dt);
            s.pose
        })
        .collect()
}

pub(crate) fn linspace(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
    if n <= 1 {
        lo
    } else {
        // Rounding can push the last sample one ulp past `hi`.
        (lo + (hi - lo) * i as f64 / (n - 1) as f64).min(hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub v: f64,
    pub w: f64,
    /// `1 − |bearing error at rollout end| / π`.
    pub heading: f64,
    /// Minimum obstacle distance along the rollout, capped at `3·robot_radius`.
    pub clearance: f64,
    /// `v / v_max`.
    pub velocity: f64,
    pub admissible: bool,
}

fn min_distance(poses: &[Pose2D], obstacles: &[[f64; 2]], cap: f64) -> f64 {
    let mut best = cap * cap;
    for p in poses {
        for o in obstacles {
            let d2 = (p.x - o[0]) * (p.x - o[0]) + (p.y - o[1]) * (p.y - o[1]);
            if d2 < best {
                best = d2;
            }
        }
    }
    best.sqrt()
}

/// Score every candidate on the window grid (v-major order).
pub fn evaluate_candidates(
    state: &RobotState,
    goal: &Pose2D,
    obstacles: &[[f64; 2]],
    cfg: &DwaConfig,
) -> Vec<Candidate> {
    let win = dynamic_window(state, cfg);
    let cap = cfg.clearance_cap();
    // Points beyond the farthest reachable rollout pose plus the cap cannot
    // lower any clipped clearance.
    let reach = win.v_lo.abs().max(win.v_hi.abs()) * cfg.horizon + cap;
    let near: Vec<[f64; 2]> = obstacles
        .iter()
        .copied()
        .filter(|o| (o[0] - state.pose.x).hypot(o[1] - state.pose.y) <= reach + 1e-9)
        .collect();

    let mut out = Vec::with_capacity(cfg.samples_v * cfg.samples_w);
    for i in 0..cfg.samples_v {
        let v = linspace(win.v_lo, win.v_hi, cfg.samples_v, i);
        for j in 0..cfg.samples_w {
            let w = linspace(win.w_lo, win.w_hi, cfg.samples_w, j);
            let poses = rollout(state, v, w, cfg.dt, cfg.horizon);
            let end = poses[poses.len() - 1];
            let bearing = (goal.y - end.y).atan2(goal.x - end.x);
            let heading = 1.0 - angle_diff(bearing, end.psi).abs() / PI;
            let clearance = min_distance(&poses, &near, cap);
            out.push(Candidate {
                v,
                w,
                heading,
                clearance: clearance.min(cap),
                velocity: v / cfg.v_max,
                admissible: clearance >= cfg.min_clearance(),
            });
        }
    }
    out
}

fn normalizer(values: impl Iterator<Item = f64> + Clone) -> impl Fn(f64) -> f64 {
    let lo = values.clone().fold(f64::INFINITY, f64::min);
    let hi = values.fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    move |x| if range > 0.0 { (x - lo) / range } else { 0.0 }
}

/// Index of the best admissible candidate, or `None` if none is admissible.
pub fn select_candidate(candidates: &[Candidate], weights: &ScoreWeights) -> Option<usize> {
    let admissible = candidates.iter().filter(|c| c.admissible);
    let nh = normalizer(admissible.clone().map(|c| c.heading));
    let nc = normalizer(admissible.clone().map(|c| c.clearance));
    let nv = normalizer(admissible.map(|c| c.velocity));
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in candidates.iter().enumerate().filter(|(_, c)| c.admissible) {
        let score =
            weights.heading * nh(c.heading) + weights.clearance * nc(c.clearance) + weights.velocity * nv(c.velocity);
        if best.is_none_or(|(_, b)| score > b) {
            best = Some((i, score));
        }
    }
    best.map(|(i, _)| i)
}

/// Command issued when every candidate collides: rotate in place.
pub fn escape_command(cfg: &DwaConfig) -> VelocityCommand {
    VelocityCommand::new(0.0, cfg.w_max / 2.0)
}

/// One DWA control decision toward `goal`'s position using the scan taken at
/// `state.pose`. An empty scan means free space.
pub fn dwa_step(state: &RobotState, goal: &Pose2D, scan: &LidarScan, cfg: &DwaConfig) -> VelocityCommand {
    let obstacles = scan.obstacle_points(&state.pose);
    let candidates = evaluate_candidates(state, goal, &obstacles, cfg);
    match select_candidate(&candidates, &cfg.weights) {
        Some(i) => VelocityCommand::new(candidates[i].v, candidates[i].w),
        None => escape_command(cfg),
    }
}
