//! Dataset sample types: the timestamped pose log and the full episode record.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, DepthImage};
use crate::simulator::{EpisodeConfig, World};
use crate::types::{Pose2D, Trajectory};

/// Poses sampled at a fixed rate, expressed in the start-pose frame.
#[derive(Debug, Clone, PartialEq)]
pub struct RawLog {
    samples: Vec<(f64, Pose2D)>,
}

impl RawLog {
    /// Times must be finite and strictly increasing.
    pub fn new(samples: Vec<(f64, Pose2D)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("raw log is empty"));
        }
        if samples
            .iter()
            .any(|(t, p)| !(t.is_finite() && p.x.is_finite() && p.y.is_finite() && p.psi.is_finite()))
        {
            return Err(Error::invalid("raw log contains non-finite values"));
        }
        if let Some(i) = samples.windows(2).position(|w| w[1].0 <= w[0].0) {
            return Err(Error::invalid(format!(
                "raw log time not increasing at sample {}",
                i + 1
            )));
        }
        Ok(RawLog { samples })
    }

    pub fn samples(&self) -> &[(f64, Pose2D)] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Time between the first and last sample (s).
    pub fn duration(&self) -> f64 {
        self.samples[self.samples.len() - 1].0 - self.samples[0].0
    }

    pub fn last_pose(&self) -> Pose2D {
        self.samples[self.samples.len() - 1].1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EpisodeStatus {
    Docked,
    Timeout,
    Collision,
}

impl EpisodeStatus {
    pub const ALL: [EpisodeStatus; 3] = [EpisodeStatus::Docked, EpisodeStatus::Timeout, EpisodeStatus::Collision];

    pub fn as_str(self) -> &'static str {
        match self {
            EpisodeStatus::Docked => "Docked",
            EpisodeStatus::Timeout => "Timeout",
            EpisodeStatus::Collision => "Collision",
        }
    }
}

impl fmt::Display for EpisodeStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EpisodeStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EpisodeStatus::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown episode status {s:?}")))
    }
}

/// Who produced the ground-truth trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    #[default]
    RuleBased,
    Expert,
}

/// One dataset sample: the depth snapshot at the start pose, the logged run
/// and its resampled ground-truth trajectory, plus everything needed to
/// re-create it.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub status: EpisodeStatus,
    pub source: Source,
    pub config: EpisodeConfig,
    pub world: World,
    pub intrinsics: CameraIntrinsics,
    pub depth: DepthImage,
    /// Archive-relative path of the depth image.
    pub depth_ref: PathBuf,
    pub rgb_ref: Option<PathBuf>,
    pub raw_log: RawLog,
    /// Start-frame trajectory with `config.q_points` waypoints.
    pub gt_trajectory: Trajectory,
}

impl EpisodeRecord {
    pub fn start_pose(&self) -> Pose2D {
        self.config.start_pose
    }

    pub fn station_pose(&self) -> Pose2D {
        self.world.station.pose
    }

    /// Episode duration covered by the log (s).
    pub fn duration(&self) -> f64 {
        self.raw_log.duration()
    }
}
