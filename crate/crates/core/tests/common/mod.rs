//! Independent reference implementations used as test oracles. They are
//! deliberately written as plain loops over the textbook formulas.
#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use dockkit_core::controller::{DwaConfig, RobotState};
use dockkit_core::geometry::{CameraIntrinsics, DepthImage};
use dockkit_core::types::Pose2D;

pub fn wrap(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Per-pixel pinhole back-projection: `z·((u − cx)/fx, (v − cy)/fy, 1)`.
pub fn naive_backproject(intr: &CameraIntrinsics, depth: &DepthImage, stride: usize) -> Vec<[f64; 3]> {
    let mut out = Vec::new();
    let mut v = 0;
    while v < intr.height {
        let mut u = 0;
        while u < intr.width {
            let raw = depth.get(u, v);
            if raw != 0 {
                let z = raw as f64 / depth.depth_scale();
                out.push([
                    (u as f64 - intr.cx) / intr.fx * z,
                    (v as f64 - intr.cy) / intr.fy * z,
                    z,
                ]);
            }
            u += stride;
        }
        v += stride;
    }
    out
}

/// Unicycle step along the exact arc.
pub fn unicycle(p: (f64, f64, f64), v: f64, w: f64, dt: f64) -> (f64, f64, f64) {
    let (x, y, psi) = p;
    if w.abs() < 1e-9 {
        (x + v * dt * psi.cos(), y + v * dt * psi.sin(), wrap(psi + w * dt))
    } else {
        let r = v / w;
        let psi1 = psi + w * dt;
        (
            x + r * (psi1.sin() - psi.sin()),
            y + r * (psi.cos() - psi1.cos()),
            wrap(psi1),
        )
    }
}

pub fn oracle_rollout(state: &RobotState, v: f64, w: f64, dt: f64, horizon: f64) -> Vec<(f64, f64, f64)> {
    let n = ((horizon / dt).round() as usize).max(1);
    let mut p = (state.pose.x, state.pose.y, state.pose.psi);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        p = unicycle(p, v, w, dt);
        out.push(p);
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub struct OracleCandidate {
    pub v: f64,
    pub w: f64,
    pub heading: f64,
    pub clearance: f64,
    pub velocity: f64,
    pub admissible: bool,
}

pub fn min_distance(poses: &[(f64, f64, f64)], obstacles: &[[f64; 2]]) -> f64 {
    let mut best = f64::INFINITY;
    for p in poses {
        for o in obstacles {
            let d = ((p.0 - o[0]) * (p.0 - o[0]) + (p.1 - o[1]) * (p.1 - o[1])).sqrt();
            best = best.min(d);
        }
    }
    best
}

/// Exhaustive DWA: every grid candidate scored, min-max normalized over the
/// admissible ones, first maximum wins. Returns the candidates and the pick.
pub fn oracle_dwa(
    state: &RobotState,
    goal: [f64; 2],
    obstacles: &[[f64; 2]],
    cfg: &DwaConfig,
) -> (Vec<OracleCandidate>, Option<usize>) {
    let v_lo = cfg.v_min.max(state.v - cfg.a_v * cfg.dt);
    let v_hi = cfg.v_max.min(state.v + cfg.a_v * cfg.dt).max(v_lo);
    let w_lo = (-cfg.w_max).max(state.w - cfg.a_w * cfg.dt);
    let w_hi = cfg.w_max.min(state.w + cfg.a_w * cfg.dt).max(w_lo);
    let grid = |lo: f64, hi: f64, n: usize, i: usize| {
        if n <= 1 {
            lo
        } else {
            (lo + (hi - lo) * i as f64 / (n - 1) as f64).min(hi)
        }
    };
    let cap = 3.0 * cfg.robot_radius;
    let mut cands = Vec::new();
    for i in 0..cfg.samples_v {
        let v = grid(v_lo, v_hi, cfg.samples_v, i);
        for j in 0..cfg.samples_w {
            let w = grid(w_lo, w_hi, cfg.samples_w, j);
            let poses = oracle_rollout(state, v, w, cfg.dt, cfg.horizon);
            let end = poses[poses.len() - 1];
            let bearing = (goal[1] - end.1).atan2(goal[0] - end.0);
            let dist = min_distance(&poses, obstacles);
            cands.push(OracleCandidate {
                v,
                w,
                heading: 1.0 - wrap(bearing - end.2).abs() / PI,
                clearance: dist.min(cap),
                velocity: v / cfg.v_max,
                admissible: dist >= cfg.robot_radius + cfg.safety_margin,
            });
        }
    }
    let range = |f: &dyn Fn(&OracleCandidate) -> f64| {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for c in cands.iter().filter(|c| c.admissible) {
            lo = lo.min(f(c));
            hi = hi.max(f(c));
        }
        (lo, hi - lo)
    };
    let norm = |x: f64, (lo, r): (f64, f64)| if r > 0.0 { (x - lo) / r } else { 0.0 };
    let rh = range(&|c| c.heading);
    let rc = range(&|c| c.clearance);
    let rv = range(&|c| c.velocity);
    let mut best: Option<(usize, f64)> = None;
    for (k, c) in cands.iter().enumerate() {
        if !c.admissible {
            continue;
        }
        let s = cfg.weights.heading * norm(c.heading, rh)
            + cfg.weights.clearance * norm(c.clearance, rc)
            + cfg.weights.velocity * norm(c.velocity, rv);
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((k, s));
        }
    }
    (cands, best.map(|b| b.0))
}

/// Camera-frame depth of the first hit of pixel `(u, v)` against the ground
/// plane and the vertical plane `x = wall_x` (unbounded), for a camera at
/// `pose` and `height` looking along the heading. Returns the depth, whether
/// the wall was hit first, and the height of the hit point.
pub fn plane_depth(
    intr: &CameraIntrinsics,
    pose: &Pose2D,
    height: f64,
    wall_x: f64,
    u: usize,
    v: usize,
) -> Option<(f64, bool, f64)> {
    let a = (u as f64 - intr.cx) / intr.fx;
    let b = (v as f64 - intr.cy) / intr.fy;
    // World direction for camera ray (a, b, 1): forward + a·right + b·down.
    let (s, c) = pose.psi.sin_cos();
    let dx = c + a * s;
    let dz = -b;
    let mut best: Option<(f64, bool, f64)> = None;
    if dz < 0.0 {
        best = Some((height / -dz, false, 0.0));
    }
    if dx > 0.0 && wall_x > pose.x {
        let t = (wall_x - pose.x) / dx;
        let z = height + dz * t;
        if z >= 0.0 && best.is_none_or(|(d, _, _)| t < d) {
            best = Some((t, true, z));
        }
    }
    best
}
