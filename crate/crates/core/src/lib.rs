//! Docking toolkit: depth-camera geometry, a numeric reference of the fusion
//! network math, the virtual-point-guidance + DWA docking stack, a 2D
//! docking simulator, evaluation metrics and dataset I/O.

pub mod config;
pub mod controller;
pub mod dataset;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod netmath;
pub mod planner;
pub mod record;
pub mod simulator;
pub mod types;

pub use controller::{dwa_step, DwaConfig, LidarScan, RobotState};
pub use error::{Error, Result};
pub use geometry::{CameraIntrinsics, DepthImage, PointCloud};
pub use metrics::{evaluate, EvalReport, EvalSettings};
pub use planner::{plan_vpg, DockingStation, VpgPlan};
pub use record::{EpisodeRecord, EpisodeStatus, RawLog};
pub use simulator::{run_episode, EpisodeConfig, World};
pub use types::{wrap_angle, OrientationVec, Pose2D, Trajectory, VelocityCommand};
