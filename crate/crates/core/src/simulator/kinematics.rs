use crate::controller::RobotState;
use crate::types::{Pose2D, VelocityCommand};

/// Exact unicycle update under a held command.
pub fn step_kinematics(state: &RobotState, cmd: &VelocityCommand, dt: f64) -> RobotState {
    let RobotState { pose, .. } = *state;
    let (v, w) = (cmd.v, cmd.w);
    let pose = if w.abs() < 1e-9 {
        let (s, c) = pose.psi.sin_cos();
        Pose2D::new(pose.x + v * dt * c, pose.y + v * dt * s, pose.psi + w * dt)
    } else {
        let r = v / w;
        let psi1 = pose.psi + w * dt;
        Pose2D::new(
            pose.x + r * (psi1.sin() - pose.psi.sin()),
            pose.y + r * (pose.psi.cos() - psi1.cos()),
            psi1,
        )
    };
    RobotState { pose, v, w }
}
