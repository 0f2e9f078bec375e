//! Run-wide configuration tree, loaded from TOML. Every field has a default;
//! unknown keys are rejected.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::controller::DwaConfig;
use crate::dataset::{parse_toml, read_text};
use crate::error::{Error, Result};
use crate::geometry::DEFAULT_STRIDE;
use crate::metrics::DEFAULT_LIMIT_MARGIN;
use crate::netmath::NetConfig;
use crate::planner::{PlanTolerances, DEFAULT_STANDOFF};
use crate::record::EpisodeRecord;
use crate::simulator::{
    generate_scenario, run_episode, CameraRig, EpisodeConfig, LidarConfig, Scenario, WorldGenConfig,
};
use crate::types::{Pose2D, DEFAULT_Q};

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "DOCKKIT_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub log_hz: f64,
    pub max_duration: f64,
    pub standoff: f64,
    pub q_points: usize,
    pub yaw_gain: f64,
    pub approach_gain: f64,
    pub tolerances: PlanTolerances,
    pub lidar: LidarConfig,
    pub camera: CameraRig,
}

impl Default for SimConfig {
    fn default() -> Self {
        let ep = EpisodeConfig::default();
        SimConfig {
            log_hz: ep.log_hz,
            max_duration: ep.max_duration,
            standoff: DEFAULT_STANDOFF,
            q_points: DEFAULT_Q,
            yaw_gain: ep.yaw_gain,
            approach_gain: ep.approach_gain,
            tolerances: ep.tolerances,
            lidar: ep.lidar,
            camera: ep.camera,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    /// Farthest-point sampling to `fps_points` points.
    Fps,
    /// Voxel-grid centroids at `voxel_size`.
    Voxel,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    pub stride: usize,
    pub undistort: bool,
    pub sampling: Sampling,
    pub fps_points: usize,
    /// m
    pub voxel_size: f64,
    /// Depth noise standard deviation (sensor units).
    pub sigma_d: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            stride: DEFAULT_STRIDE,
            undistort: true,
            sampling: Sampling::None,
            fps_points: 1024,
            voxel_size: 0.05,
            sigma_d: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    /// Slack on the kinematic limits in the plausibility check.
    pub limit_margin: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            limit_margin: DEFAULT_LIMIT_MARGIN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GlobalConfig {
    /// Base seed; episode `i` uses `seed + i`.
    pub seed: u64,
    pub episodes: usize,
    pub out: PathBuf,
    pub sim: SimConfig,
    pub dwa: DwaConfig,
    pub worldgen: WorldGenConfig,
    pub geometry: GeometryConfig,
    pub net: NetConfig,
    pub eval: EvalConfig,
}

impl Default for GlobalConfig {
    fn default() -> Self {
        GlobalConfig {
            seed: 0,
            episodes: 10,
            out: PathBuf::from("dataset"),
            sim: SimConfig::default(),
            dwa: DwaConfig::default(),
            worldgen: WorldGenConfig::default(),
            geometry: GeometryConfig::default(),
            net: NetConfig::default(),
            eval: EvalConfig::default(),
        }
    }
}

impl GlobalConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self> {
        parse_toml(text, path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&read_text(path)?, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config tree is TOML-encodable")
    }

    pub fn validate(&self) -> Result<()> {
        // Seeds are stored as TOML integers, which are signed 64-bit.
        if self.seed.saturating_add(self.episodes as u64) > i64::MAX as u64 {
            return Err(Error::invalid("seed + episodes must fit in a signed 64-bit integer"));
        }
        self.episode_config(Pose2D::default(), 0).validate()?;
        self.worldgen.validate()?;
        let g = &self.geometry;
        if g.stride == 0
            || g.fps_points == 0
            || !(g.voxel_size.is_finite() && g.voxel_size > 0.0)
            || !(g.sigma_d.is_finite() && g.sigma_d >= 0.0)
        {
            return Err(Error::invalid("geometry settings must be positive"));
        }
        if !(self.eval.limit_margin.is_finite() && self.eval.limit_margin >= 1.0) {
            return Err(Error::invalid("eval.limit_margin must be at least 1"));
        }
        let n = &self.net;
        if [
            n.grid_height,
            n.grid_width,
            n.grid_channels,
            n.tokens,
            n.model_width,
            n.steps,
            n.ffn_hidden,
        ]
        .contains(&0)
        {
            return Err(Error::invalid("net dimensions must be positive"));
        }
        Ok(())
    }

    pub fn episode_config(&self, start_pose: Pose2D, seed: u64) -> EpisodeConfig {
        let s = &self.sim;
        EpisodeConfig {
            start_pose,
            log_hz: s.log_hz,
            max_duration: s.max_duration,
            standoff: s.standoff,
            q_points: s.q_points,
            seed,
            tolerances: s.tolerances,
            yaw_gain: s.yaw_gain,
            approach_gain: s.approach_gain,
            dwa: self.dwa,
            lidar: s.lidar,
            camera: s.camera,
        }
    }

    pub fn episode_seed(&self, index: usize) -> u64 {
        self.seed + index as u64
    }

    /// Randomized world and start pose for `seed`.
    pub fn scenario(&self, seed: u64) -> Result<Scenario> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        generate_scenario(&self.worldgen, self.dwa.robot_radius, self.sim.standoff, &mut rng)
    }

    /// Generate and run episode `index` of the configured batch.
    pub fn run_indexed_episode(&self, index: usize) -> Result<EpisodeRecord> {
        let seed = self.episode_seed(index);
        let sc = self.scenario(seed)?;
        run_episode(&sc.world, &self.episode_config(sc.start, seed))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let cfg = GlobalConfig::default();
        cfg.validate().unwrap();
        let text = cfg.to_toml();
        assert_eq!(GlobalConfig::from_toml(&text, Path::new("x")).unwrap(), cfg);
    }

    #[test]
    fn partial_file_fills_defaults() {
        let cfg = GlobalConfig::from_toml("seed = 5\n[dwa]\nv_max = 0.8\n", Path::new("x")).unwrap();
        assert_eq!(cfg.seed, 5);
        assert_eq!(cfg.dwa.v_max, 0.8);
        assert_eq!(cfg.dwa.w_max, DwaConfig::default().w_max);
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = GlobalConfig::from_toml("seed = 1\n[dwa]\nvmax = 2.0\n", Path::new("c.toml")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn invalid_values_rejected() {
        let mut cfg = GlobalConfig::default();
        cfg.sim.q_points = 1;
        assert!(cfg.validate().is_err());
        let cfg = GlobalConfig {
            seed: u64::MAX,
            ..GlobalConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
