//! 2D docking world: kinematics, planar lidar, synthetic depth rendering,
//! closed-loop episodes and trajectory resampling.

mod episode;
mod kinematics;
mod lidar;
mod render;
mod resample;
mod world;
mod worldgen;

pub use episode::{run_episode, CameraRig, EpisodeConfig, LidarConfig};
pub use kinematics::step_kinematics;
pub use lidar::lidar_scan;
pub use render::{camera_extrinsics, render_depth, OBSTACLE_HEIGHT};
pub use resample::resample_trajectory;
pub use world::{Bounds, Obstacle, World};
pub use worldgen::{generate_scenario, Scenario, WorldGenConfig};
