//! On-disk episode archives and dataset indexes.
//!
//! One directory per episode:
//!
//! ```text
//! meta.toml        status, source, file refs, intrinsics, episode config, world
//! depth.pgm        binary 16-bit PGM (P5, maxval 65535, big-endian)
//! raw_log.csv      index,t_s,x_m,y_m,cos_psi,sin_psi
//! trajectory.csv   index,x_m,y_m,cos_psi,sin_psi
//! ```
//!
//! CSV reals carry 9 significant digits. A dataset is a directory of
//! episodes plus `index.csv` (`episode_id,path,status`).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, DepthImage};
use crate::record::{EpisodeRecord, EpisodeStatus, RawLog, Source};
use crate::simulator::{EpisodeConfig, World};
use crate::types::{OrientationVec, Pose2D, Trajectory};

pub const META_FILE: &str = "meta.toml";
pub const DEPTH_FILE: &str = "depth.pgm";
pub const RAW_LOG_FILE: &str = "raw_log.csv";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const INDEX_FILE: &str = "index.csv";

pub const FORMAT_VERSION: u32 = 1;

/// Unit-norm tolerance applied to orientation columns on load.
pub const CSV_UNIT_TOL: f64 = 1e-6;

const RAW_LOG_HEADER: [&str; 6] = ["index", "t_s", "x_m", "y_m", "cos_psi", "sin_psi"];
const TRAJECTORY_HEADER: [&str; 5] = ["index", "x_m", "y_m", "cos_psi", "sin_psi"];
const INDEX_HEADER: [&str; 3] = ["episode_id", "path", "status"];

/// Round to 9 significant digits and print the shortest text that reads back
/// to the rounded value.
pub fn format_real(x: f64) -> String {
    let rounded: f64 = format!("{x:.8e}").parse().expect("formatted float parses");
    // Drop the sign of negative zero.
    format!("{}", rounded + 0.0)
}

/// Value `x` takes after a trip through the CSV text format.
pub fn text_precision(x: f64) -> f64 {
    format_real(x).parse().expect("formatted float parses")
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DepthMeta {
    width: usize,
    height: usize,
    depth_scale: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Meta {
    format_version: u32,
    status: EpisodeStatus,
    source: Source,
    depth_ref: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rgb_ref: Option<String>,
    raw_log_ref: String,
    trajectory_ref: String,
    log_samples: usize,
    depth: DepthMeta,
    intrinsics: CameraIntrinsics,
    config: EpisodeConfig,
    world: World,
}

/// Files written for one episode, relative to its directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
}

fn path_str(p: &Path) -> String {
    p.to_string_lossy().replace('\\', "/")
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

fn csv_to_bytes(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn trajectory_csv(traj: &Trajectory) -> Vec<u8> {
    csv_to_bytes(
        &TRAJECTORY_HEADER,
        traj.positions()
            .iter()
            .zip(traj.orientations())
            .enumerate()
            .map(|(i, (p, o))| {
                vec![
                    i.to_string(),
                    format_real(p[0]),
                    format_real(p[1]),
                    format_real(o.c),
                    format_real(o.s),
                ]
            }),
    )
}

fn raw_log_csv(log: &RawLog) -> Vec<u8> {
    csv_to_bytes(
        &RAW_LOG_HEADER,
        log.samples().iter().enumerate().map(|(i, (t, p))| {
            let (s, c) = p.psi.sin_cos();
            vec![
                i.to_string(),
                format_real(*t),
                format_real(p.x),
                format_real(p.y),
                format_real(c),
                format_real(s),
            ]
        }),
    )
}

pub fn write_trajectory(traj: &Trajectory, path: &Path) -> Result<()> {
    write_file(path, &trajectory_csv(traj))
}

/// Write `record` into `dir` (created if needed).
pub fn write_episode(record: &EpisodeRecord, dir: &Path) -> Result<Manifest> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let meta = Meta {
        format_version: FORMAT_VERSION,
        status: record.status,
        source: record.source,
        depth_ref: path_str(&record.depth_ref),
        rgb_ref: record.rgb_ref.as_deref().map(path_str),
        raw_log_ref: RAW_LOG_FILE.into(),
        trajectory_ref: TRAJECTORY_FILE.into(),
        log_samples: record.raw_log.len(),
        depth: DepthMeta {
            width: record.depth.width(),
            height: record.depth.height(),
            depth_scale: record.depth.depth_scale(),
        },
        intrinsics: record.intrinsics,
        config: record.config.clone(),
        world: record.world.clone(),
    };
    let text = toml::to_string(&meta).map_err(|e| Error::invalid(format!("cannot encode meta: {e}")))?;
    write_file(&dir.join(META_FILE), text.as_bytes())?;
    record.depth.save_pgm(&dir.join(&record.depth_ref))?;
    write_file(&dir.join(RAW_LOG_FILE), &raw_log_csv(&record.raw_log))?;
    write_file(&dir.join(TRAJECTORY_FILE), &trajectory_csv(&record.gt_trajectory))?;
    Ok(Manifest {
        dir: dir.to_path_buf(),
        files: [META_FILE, &meta.depth_ref, RAW_LOG_FILE, TRAJECTORY_FILE]
            .iter()
            .map(PathBuf::from)
            .collect(),
    })
}

fn require(dir: &Path, name: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    if path.is_file() {
        Ok(path)
    } else {
        Err(Error::MissingComponent {
            name: name.to_string(),
            path,
        })
    }
}

fn toml_line(text: &str, err: &toml::de::Error) -> usize {
    err.span()
        .map_or(0, |s| text[..s.start.min(text.len())].matches('\n').count() + 1)
}

/// Parse a TOML document into `T`, reporting the offending line on failure.
pub fn parse_toml<T: for<'de> Deserialize<'de>>(text: &str, path: &Path) -> Result<T> {
    toml::from_str(text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: toml_line(text, &e),
        reason: e.message().to_string(),
    })
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Parse rows of a CSV file with an exact header, as reals after the index column.
fn read_csv_rows(path: &Path, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let text = read_text(path)?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let parse_err = |line: usize, reason: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let got = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    if got.iter().ne(header.iter().copied()) {
        return Err(parse_err(1, format!("expected header {}", header.join(","))));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| parse_err(line, e.to_string()))?;
        if rec.len() != header.len() {
            return Err(parse_err(
                line,
                format!("expected {} fields, found {}", header.len(), rec.len()),
            ));
        }
        let index: usize = rec[0]
            .parse()
            .map_err(|_| parse_err(line, format!("bad index {:?}", &rec[0])))?;
        if index != i {
            return Err(parse_err(line, format!("index {index} out of sequence, expected {i}")));
        }
        let vals = rec
            .iter()
            .skip(1)
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| parse_err(line, format!("bad number {f:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(vals);
    }
    Ok(rows)
}

fn unit(path: &Path, row: usize, c: f64, s: f64) -> Result<OrientationVec> {
    OrientationVec::try_new(c, s, CSV_UNIT_TOL)
        .map(|o| OrientationVec::from_raw(o.c, o.s))
        .map_err(|_| Error::corrupt(path, format!("row {row}: orientation ({c}, {s}) is not unit norm")))
}

pub fn read_trajectory(path: &Path) -> Result<Trajectory> {
    let rows = read_csv_rows(path, &TRAJECTORY_HEADER)?;
    if rows.is_empty() {
        return Err(Error::corrupt(path, "trajectory has no rows"));
    }
    let mut positions = Vec::with_capacity(rows.len());
    let mut orientations = Vec::with_capacity(rows.len());
    for (i, r) in rows.iter().enumerate() {
        positions.push([r[0], r[1]]);
        orientations.push(unit(path, i, r[2], r[3])?);
    }
    Trajectory::new(positions, orientations).map_err(|e| Error::corrupt(path, e.to_string()))
}

fn read_raw_log(path: &Path) -> Result<RawLog> {
    let rows = read_csv_rows(path, &RAW_LOG_HEADER)?;
    let samples = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let o = unit(path, i, r[3], r[4])?;
            Ok((r[0], Pose2D::new(r[1], r[2], o.angle())))
        })
        .collect::<Result<Vec<_>>>()?;
    RawLog::new(samples).map_err(|e| Error::corrupt(path, e.to_string()))
}

/// Load and validate an episode archive.
pub fn read_episode(dir: &Path) -> Result<EpisodeRecord> {
    let meta_path = require(dir, META_FILE)?;
    let meta: Meta = parse_toml(&read_text(&meta_path)?, &meta_path)?;
    if meta.format_version != FORMAT_VERSION {
        return Err(Error::corrupt(
            &meta_path,
            format!("unsupported format_version {}", meta.format_version),
        ));
    }
    let corrupt_meta = |e: Error| Error::corrupt(&meta_path, e.to_string());
    meta.config.validate().map_err(corrupt_meta)?;
    meta.world.validate().map_err(corrupt_meta)?;
    meta.intrinsics.validate().map_err(corrupt_meta)?;

    let depth_path = require(dir, &meta.depth_ref)?;
    let log_path = require(dir, &meta.raw_log_ref)?;
    let traj_path = require(dir, &meta.trajectory_ref)?;

    let depth = DepthImage::load_pgm(&depth_path, meta.depth.depth_scale)?;
    if (depth.width(), depth.height()) != (meta.depth.width, meta.depth.height)
        || (depth.width(), depth.height()) != (meta.intrinsics.width, meta.intrinsics.height)
    {
        return Err(Error::corrupt(&depth_path, "depth image size disagrees with meta"));
    }
    let raw_log = read_raw_log(&log_path)?;
    if raw_log.len() != meta.log_samples {
        return Err(Error::corrupt(
            &log_path,
            format!("expected {} samples, found {}", meta.log_samples, raw_log.len()),
        ));
    }
    let gt_trajectory = read_trajectory(&traj_path)?;
    if gt_trajectory.len() != meta.config.q_points {
        return Err(Error::corrupt(
            &traj_path,
            format!("expected {} rows, found {}", meta.config.q_points, gt_trajectory.len()),
        ));
    }
    Ok(EpisodeRecord {
        status: meta.status,
        source: meta.source,
        config: meta.config,
        world: meta.world,
        intrinsics: meta.intrinsics,
        depth,
        depth_ref: PathBuf::from(meta.depth_ref),
        rgb_ref: meta.rgb_ref.map(PathBuf::from),
        raw_log,
        gt_trajectory,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexEntry {
    pub episode_id: String,
    /// Relative to the dataset root.
    pub path: PathBuf,
    pub status: EpisodeStatus,
}

pub fn episode_id(index: usize) -> String {
    format!("ep_{index:06}")
}

pub fn write_index(root: &Path, entries: &[IndexEntry]) -> Result<()> {
    fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    let bytes = csv_to_bytes(
        &INDEX_HEADER,
        entries
            .iter()
            .map(|e| vec![e.episode_id.clone(), path_str(&e.path), e.status.to_string()]),
    );
    write_file(&root.join(INDEX_FILE), &bytes)
}

pub fn read_index(root: &Path) -> Result<Vec<IndexEntry>> {
    let path = require(root, INDEX_FILE)?;
    let text = read_text(&path)?;
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let parse_err = |line: usize, reason: String| Error::Parse {
        path: path.clone(),
        line,
        reason,
    };
    let got = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    if got.iter().ne(INDEX_HEADER.iter().copied()) {
        return Err(parse_err(1, format!("expected header {}", INDEX_HEADER.join(","))));
    }
    rdr.records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec.map_err(|e| parse_err(i + 2, e.to_string()))?;
            if rec.len() != 3 {
                return Err(parse_err(i + 2, "expected 3 fields".into()));
            }
            Ok(IndexEntry {
                episode_id: rec[0].to_string(),
                path: PathBuf::from(&rec[1]),
                status: rec[2].parse().map_err(|e: Error| parse_err(i + 2, e.to_string()))?,
            })
        })
        .collect()
}

pub fn write_world(world: &World, path: &Path) -> Result<()> {
    let text = toml::to_string(world).map_err(|e| Error::invalid(format!("cannot encode world: {e}")))?;
    write_file(path, text.as_bytes())
}

pub fn read_world(path: &Path) -> Result<World> {
    let world: World = parse_toml(&read_text(path)?, path)?;
    world.validate()?;
    Ok(world)
}
