//! Virtual-point guidance: a standoff waypoint in front of the station, then
//! a decoupled Rotate → Approach → Rotate → Dock maneuver.
//!
//! Convention: the station heading points outward from the docking face,
//! toward an approaching robot. The robot docks facing the station, i.e. with
//! heading `station.psi + π`. The real docking point sits `dock_depth` behind
//! the face along the docking direction; the virtual point sits `standoff`
//! in front of the real point.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::controller::RobotState;
use crate::error::{Error, Result};
use crate::simulator::step_kinematics;
use crate::types::{angle_diff, Pose2D, VelocityCommand};

pub const DEFAULT_STANDOFF: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DockingStation {
    /// Pose of the docking face; heading is the outward docking axis.
    pub pose: Pose2D,
    /// Distance from the face to the physical contact point (m).
    #[serde(default)]
    pub dock_depth: f64,
}

impl DockingStation {
    pub fn new(pose: Pose2D, dock_depth: f64) -> Result<Self> {
        if !(dock_depth.is_finite() && dock_depth >= 0.0) {
            return Err(Error::invalid("dock_depth must be non-negative"));
        }
        Ok(DockingStation { pose, dock_depth })
    }

    /// Heading the robot must hold when docked.
    pub fn docking_heading(&self) -> f64 {
        self.pose.psi + PI
    }

    pub fn transformed(&self, frame: &Pose2D) -> DockingStation {
        DockingStation {
            pose: frame.compose(&self.pose),
            dock_depth: self.dock_depth,
        }
    }
}

/// Completion tolerances shared by all phases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanTolerances {
    /// m
    pub position: f64,
    /// rad
    pub heading: f64,
}

impl Default for PlanTolerances {
    fn default() -> Self {
        PlanTolerances {
            position: 0.02,
            heading: 1f64.to_radians(),
        }
    }
}

/// Real and virtual docking points, in that order.
pub fn compute_docking_points(station: &DockingStation, standoff: f64) -> Result<(Pose2D, Pose2D)> {
    if !(standoff.is_finite() && standoff > 0.0) {
        return Err(Error::invalid(format!("standoff must be positive, got {standoff}")));
    }
    let (s, c) = station.pose.psi.sin_cos();
    let heading = station.docking_heading();
    let real = Pose2D::new(
        station.pose.x - station.dock_depth * c,
        station.pose.y - station.dock_depth * s,
        heading,
    );
    let virt = Pose2D::new(real.x + standoff * c, real.y + standoff * s, heading);
    Ok((virt, real))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseKind {
    Rotate,
    Approach,
    Rotate2,
    Dock,
}

impl PhaseKind {
    pub fn is_rotation(self) -> bool {
        matches!(self, PhaseKind::Rotate | PhaseKind::Rotate2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseTarget {
    /// rad
    Heading(f64),
    /// m
    Position([f64; 2]),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpec {
    pub kind: PhaseKind,
    pub target: PhaseTarget,
    /// m for translations, rad for rotations.
    pub tolerance: f64,
    /// Already within tolerance when the plan was made.
    pub satisfied_at_start: bool,
}

impl PhaseSpec {
    /// Whether `pose` meets this phase's target.
    pub fn is_satisfied(&self, pose: &Pose2D) -> bool {
        match self.target {
            PhaseTarget::Heading(h) => angle_diff(h, pose.psi).abs() < self.tolerance,
            PhaseTarget::Position(p) => (p[0] - pose.x).hypot(p[1] - pose.y) < self.tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VpgPlan {
    pub virtual_point: Pose2D,
    pub real_point: Pose2D,
    pub phases: [PhaseSpec; 4],
    /// The robot started on the virtual point, so the first heading was undefined.
    pub degenerate_start: bool,
}

impl VpgPlan {
    /// Index of the first phase that still has work to do.
    pub fn first_active_phase(&self) -> usize {
        self.phases
            .iter()
            .position(|p| !p.satisfied_at_start)
            .unwrap_or(self.phases.len() - 1)
    }

    pub fn docking_heading(&self) -> f64 {
        self.real_point.psi
    }
}

pub fn plan_vpg(robot: &Pose2D, station: &DockingStation, standoff: f64, tol: &PlanTolerances) -> Result<VpgPlan> {
    if !(tol.position > 0.0 && tol.heading > 0.0) {
        return Err(Error::invalid("plan tolerances must be positive"));
    }
    let (virt, real) = compute_docking_points(station, standoff)?;
    let docking_heading = real.psi;
    if robot.distance_to(&real) < tol.position && angle_diff(docking_heading, robot.psi).abs() < tol.heading {
        return Err(Error::invalid("robot is already docked"));
    }

    let degenerate_start = robot.distance_to(&virt) < tol.position;
    let face_heading = if degenerate_start {
        robot.psi
    } else {
        (virt.y - robot.y).atan2(virt.x - robot.x)
    };

    let rotate = PhaseSpec {
        kind: PhaseKind::Rotate,
        target: PhaseTarget::Heading(face_heading),
        tolerance: tol.heading,
        satisfied_at_start: false,
    };
    let approach = PhaseSpec {
        kind: PhaseKind::Approach,
        target: PhaseTarget::Position(virt.position()),
        tolerance: tol.position,
        satisfied_at_start: degenerate_start,
    };
    let align = PhaseSpec {
        kind: PhaseKind::Rotate2,
        target: PhaseTarget::Heading(docking_heading),
        tolerance: tol.heading,
        satisfied_at_start: false,
    };
    let dock = PhaseSpec {
        kind: PhaseKind::Dock,
        target: PhaseTarget::Position(real.position()),
        tolerance: tol.position,
        satisfied_at_start: false,
    };
    let mut phases = [rotate, approach, align, dock];
    phases[0].satisfied_at_start = degenerate_start || phases[0].is_satisfied(robot);
    phases[2].satisfied_at_start = degenerate_start && phases[2].is_satisfied(robot);

    Ok(VpgPlan {
        virtual_point: virt,
        real_point: real,
        phases,
        degenerate_start,
    })
}

impl fmt::Display for VpgPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pose = |p: &Pose2D| format!("x={:.4} y={:.4} psi={:.4}", p.x, p.y, p.psi);
        writeln!(f, "virtual_point: {}", pose(&self.virtual_point))?;
        writeln!(f, "real_point: {}", pose(&self.real_point))?;
        if self.degenerate_start {
            writeln!(f, "note: robot starts on the virtual point")?;
        }
        for (i, phase) in self.phases.iter().enumerate() {
            let target = match phase.target {
                PhaseTarget::Heading(h) => format!("heading={h:.4} rad ({:.2} deg)", h.to_degrees()),
                PhaseTarget::Position(p) => format!("position=({:.4}, {:.4})", p[0], p[1]),
            };
            let state = if phase.satisfied_at_start { "done" } else { "active" };
            writeln!(
                f,
                "phase {}: {:?} {target} tol={} [{state}]",
                i + 1,
                phase.kind,
                phase.tolerance
            )?;
        }
        Ok(())
    }
}

/// Run a plan under perfect kinematics with a deadbeat closed loop: each
/// tick commands exactly the rotation or straight-line distance still needed,
/// saturated at `v_max` / `w_max`. Returns every visited pose.
pub fn execute_plan_ideal(plan: &VpgPlan, start: &Pose2D, v_max: f64, w_max: f64, dt: f64) -> Result<Vec<Pose2D>> {
    if !(v_max > 0.0 && w_max > 0.0 && dt > 0.0) {
        return Err(Error::invalid("limits and dt must be positive"));
    }
    const MAX_TICKS: usize = 100_000;
    let mut state = RobotState::at(*start);
    let mut trace = vec![*start];
    for phase in &plan.phases[plan.first_active_phase()..] {
        for _ in 0..MAX_TICKS {
            let cmd = match phase.target {
                PhaseTarget::Heading(h) => {
                    let err = angle_diff(h, state.pose.psi);
                    if err.abs() < 1e-12 {
                        break;
                    }
                    VelocityCommand::new(0.0, (err / dt).clamp(-w_max, w_max))
                }
                PhaseTarget::Position(p) => {
                    let (dx, dy) = (p[0] - state.pose.x, p[1] - state.pose.y);
                    let dist = dx.hypot(dy);
                    if dist < 1e-12 {
                        break;
                    }
                    let err = angle_diff(dy.atan2(dx), state.pose.psi);
                    if err.abs() > 1e-9 {
                        VelocityCommand::new(0.0, (err / dt).clamp(-w_max, w_max))
                    } else {
                        VelocityCommand::new((dist / dt).min(v_max), 0.0)
                    }
                }
            };
            state = step_kinematics(&state, &cmd, dt);
            trace.push(state.pose);
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn station(x: f64, y: f64, psi: f64) -> DockingStation {
        DockingStation::new(Pose2D::new(x, y, psi), 0.0).unwrap()
    }

    #[test]
    fn docking_points_on_axis() {
        let (v, r) = compute_docking_points(&station(0.0, 0.0, 0.0), 1.0).unwrap();
        assert_eq!((r.x, r.y, r.psi), (0.0, 0.0, PI));
        assert_eq!((v.x, v.y, v.psi), (1.0, 0.0, PI));
    }

    #[test]
    fn docking_points_rotated_station() {
        let (v, _) = compute_docking_points(&station(2.0, 3.0, FRAC_PI_2), 0.5).unwrap();
        assert!((v.x - 2.0).abs() < 1e-12 && (v.y - 3.5).abs() < 1e-12);
        assert!((v.psi + FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn dock_depth_moves_real_point_behind_face() {
        let st = DockingStation::new(Pose2D::new(0.0, 0.0, 0.0), 0.1).unwrap();
        let (v, r) = compute_docking_points(&st, 1.0).unwrap();
        assert!((r.x + 0.1).abs() < 1e-12 && r.y == 0.0);
        assert!((v.x - 0.9).abs() < 1e-12);
        // The face lies between the real and virtual points on the axis.
        assert!(r.x < st.pose.x && st.pose.x < v.x);
    }

    #[test]
    fn non_positive_standoff_rejected() {
        assert!(compute_docking_points(&station(0.0, 0.0, 0.0), 0.0).is_err());
        assert!(compute_docking_points(&station(0.0, 0.0, 0.0), -1.0).is_err());
        assert!(DockingStation::new(Pose2D::default(), -0.1).is_err());
    }

    #[test]
    fn plan_on_axis() {
        let plan = plan_vpg(
            &Pose2D::new(5.0, 0.0, 0.0),
            &station(0.0, 0.0, 0.0),
            1.0,
            &PlanTolerances::default(),
        )
        .unwrap();
        let kinds: Vec<_> = plan.phases.iter().map(|p| p.kind).collect();
        assert_eq!(
            kinds,
            [
                PhaseKind::Rotate,
                PhaseKind::Approach,
                PhaseKind::Rotate2,
                PhaseKind::Dock
            ]
        );
        assert_eq!(plan.phases[0].target, PhaseTarget::Heading(PI));
        assert_eq!(plan.phases[1].target, PhaseTarget::Position([1.0, 0.0]));
        assert_eq!(plan.phases[2].target, PhaseTarget::Heading(PI));
        assert_eq!(plan.phases[3].target, PhaseTarget::Position([0.0, 0.0]));
        assert_eq!(plan.first_active_phase(), 0);
    }

    #[test]
    fn plan_from_virtual_point_only_docks() {
        let plan = plan_vpg(
            &Pose2D::new(1.0, 0.0, PI),
            &station(0.0, 0.0, 0.0),
            1.0,
            &PlanTolerances::default(),
        )
        .unwrap();
        assert!(plan.degenerate_start);
        assert!(plan.phases[..3].iter().all(|p| p.satisfied_at_start));
        assert_eq!(plan.first_active_phase(), 3);
    }

    #[test]
    fn plan_degenerate_with_wrong_heading_starts_at_alignment() {
        let plan = plan_vpg(
            &Pose2D::new(1.0, 0.0, 0.3),
            &station(0.0, 0.0, 0.0),
            1.0,
            &PlanTolerances::default(),
        )
        .unwrap();
        assert_eq!(plan.first_active_phase(), 2);
    }

    #[test]
    fn plan_off_axis_heading() {
        let plan = plan_vpg(
            &Pose2D::new(1.0, 1.0, 0.0),
            &station(0.0, 0.0, 0.0),
            1.0,
            &PlanTolerances::default(),
        )
        .unwrap();
        assert_eq!(plan.phases[0].target, PhaseTarget::Heading(-FRAC_PI_2));
    }

    #[test]
    fn already_docked_is_rejected() {
        assert!(plan_vpg(
            &Pose2D::new(0.0, 0.0, PI),
            &station(0.0, 0.0, 0.0),
            1.0,
            &PlanTolerances::default()
        )
        .is_err());
    }

    #[test]
    fn ideal_execution_reaches_real_point() {
        let st = station(0.5, -1.0, 2.0);
        let start = Pose2D::new(-3.0, 2.0, -0.4);
        let plan = plan_vpg(&start, &st, 1.0, &PlanTolerances::default()).unwrap();
        let trace = execute_plan_ideal(&plan, &start, 1.0, 1.5, 0.1).unwrap();
        let end = trace.last().unwrap();
        assert!(end.distance_to(&plan.real_point) < 1e-9);
        assert!(angle_diff(end.psi, plan.docking_heading()).abs() < 1e-9);
    }

    #[test]
    fn plan_text_lists_four_phases() {
        let plan = plan_vpg(
            &Pose2D::new(5.0, 0.0, 0.0),
            &station(0.0, 0.0, 0.0),
            1.0,
            &PlanTolerances::default(),
        )
        .unwrap();
        let text = plan.to_string();
        assert_eq!(text.lines().filter(|l| l.starts_with("phase")).count(), 4);
        assert!(text.contains("Rotate2"));
    }
}
