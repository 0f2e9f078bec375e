//! Trajectory error metrics and the success criterion.
//!
//! Points are compared by index. Orientation errors use the angles recovered
//! from the unit vectors and are reported in degrees.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::World;
use crate::types::{angle_diff, Pose2D, Trajectory};

/// Success needs the final position error strictly below this (m).
pub const FDPE_THRESHOLD: f64 = 0.05;
/// Success needs the final orientation error strictly below this (deg).
pub const FDOE_THRESHOLD_DEG: f64 = 5.0;
/// Default slack on the kinematic limits when judging plausibility.
pub const DEFAULT_LIMIT_MARGIN: f64 = 1.1;

fn check_lengths(pred: &Trajectory, gt: &Trajectory) -> Result<()> {
    if pred.len() != gt.len() {
        return Err(Error::shape(format!(
            "trajectory lengths differ: {} vs {}",
            pred.len(),
            gt.len()
        )));
    }
    Ok(())
}

/// Running mean `m += (x - m) / k`; equal terms average back exactly.
fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let mut m = 0.0;
    for (k, v) in values.enumerate() {
        m += (v - m) / (k + 1) as f64;
    }
    m
}

fn heading_error_deg(pred: &Trajectory, gt: &Trajectory, i: usize) -> f64 {
    angle_diff(pred.orientations()[i].angle(), gt.orientations()[i].angle())
        .abs()
        .to_degrees()
}

fn position_error(pred: &Trajectory, gt: &Trajectory, i: usize) -> f64 {
    let (a, b) = (pred.positions()[i], gt.positions()[i]);
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Mean Euclidean distance between corresponding points (m).
pub fn l2_distance(pred: &Trajectory, gt: &Trajectory) -> Result<f64> {
    check_lengths(pred, gt)?;
    Ok(mean((0..gt.len()).map(|i| position_error(pred, gt, i))))
}

/// Mean absolute shortest-arc heading error (deg).
pub fn aer(pred: &Trajectory, gt: &Trajectory) -> Result<f64> {
    check_lengths(pred, gt)?;
    Ok(mean((0..gt.len()).map(|i| heading_error_deg(pred, gt, i))))
}

fn final_indices(pred: &Trajectory, gt: &Trajectory) -> Result<(usize, usize)> {
    if pred.is_empty() || gt.is_empty() {
        return Err(Error::invalid("trajectories must be non-empty"));
    }
    Ok((pred.len() - 1, gt.len() - 1))
}

/// Final docking position error (m).
pub fn fdpe(pred: &Trajectory, gt: &Trajectory) -> Result<f64> {
    let (i, j) = final_indices(pred, gt)?;
    let (a, b) = (pred.positions()[i], gt.positions()[j]);
    Ok((a[0] - b[0]).hypot(a[1] - b[1]))
}

/// Final docking orientation error (deg).
pub fn fdoe(pred: &Trajectory, gt: &Trajectory) -> Result<f64> {
    let (i, j) = final_indices(pred, gt)?;
    Ok(angle_diff(pred.orientations()[i].angle(), gt.orientations()[j].angle())
        .abs()
        .to_degrees())
}

/// Limits and context for the collision and plausibility checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalSettings {
    pub robot_radius: f64,
    pub v_max: f64,
    pub w_max: f64,
    /// Multiplier applied to `v_max` and `w_max`.
    pub margin: f64,
    /// Time spanned by the trajectory (s); waypoints are taken as evenly spaced in time.
    pub duration: f64,
    /// World pose of the trajectory frame (the episode start pose).
    pub frame: Pose2D,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// m
    pub l2_dis: f64,
    /// deg
    pub aer: f64,
    /// m
    pub fdpe: f64,
    /// deg
    pub fdoe: f64,
    pub collision_free: bool,
    pub kinematically_feasible: bool,
    pub success: bool,
}

/// No waypoint closer than the robot radius to an obstacle or wall.
pub fn collision_free(traj: &Trajectory, world: &World, robot_radius: f64, frame: &Pose2D) -> bool {
    traj.positions()
        .iter()
        .all(|p| world.clearance(frame.transform_point(*p)) >= robot_radius)
}

/// Segment speeds and turn rates within the (margin-scaled) limits.
pub fn kinematically_feasible(traj: &Trajectory, s: &EvalSettings) -> bool {
    let n = traj.len();
    if n < 2 {
        return true;
    }
    let v_lim = s.margin * s.v_max;
    let w_lim = s.margin * s.w_max;
    let dt = s.duration / (n - 1) as f64;
    (1..n).all(|i| {
        let (a, b) = (traj.pose(i - 1), traj.pose(i));
        let ds = a.distance_to(&b);
        let dpsi = angle_diff(b.psi, a.psi).abs();
        if dt > 0.0 {
            ds / dt <= v_lim + 1e-9 && dpsi / dt <= w_lim + 1e-9
        } else {
            ds == 0.0 && dpsi == 0.0
        }
    })
}

pub fn is_success(fdpe: f64, fdoe: f64, collision_free: bool, feasible: bool) -> bool {
    fdpe < FDPE_THRESHOLD && fdoe < FDOE_THRESHOLD_DEG && collision_free && feasible
}

pub fn evaluate(pred: &Trajectory, gt: &Trajectory, world: &World, settings: &EvalSettings) -> Result<EvalReport> {
    let l2_dis = l2_distance(pred, gt)?;
    let aer = aer(pred, gt)?;
    let fdpe = fdpe(pred, gt)?;
    let fdoe = fdoe(pred, gt)?;
    let collision_free = collision_free(pred, world, settings.robot_radius, &settings.frame);
    let kinematically_feasible = kinematically_feasible(pred, settings);
    Ok(EvalReport {
        l2_dis,
        aer,
        fdpe,
        fdoe,
        collision_free,
        kinematically_feasible,
        success: is_success(fdpe, fdoe, collision_free, kinematically_feasible),
    })
}

pub fn success_rate(reports: &[EvalReport]) -> Result<f64> {
    if reports.is_empty() {
        return Err(Error::invalid("no reports to aggregate"));
    }
    Ok(reports.iter().filter(|r| r.success).count() as f64 / reports.len() as f64)
}

/// Table-style aggregate over a batch of reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub episodes: usize,
    pub l2_dis: f64,
    pub aer: f64,
    pub fdpe: f64,
    pub fdoe: f64,
    pub sr: f64,
}

pub fn summarize(reports: &[EvalReport]) -> Result<EvalSummary> {
    let sr = success_rate(reports)?;
    let avg = |f: fn(&EvalReport) -> f64| mean(reports.iter().map(f));
    Ok(EvalSummary {
        episodes: reports.len(),
        l2_dis: avg(|r| r.l2_dis),
        aer: avg(|r| r.aer),
        fdpe: avg(|r| r.fdpe),
        fdoe: avg(|r| r.fdoe),
        sr,
    })
}
