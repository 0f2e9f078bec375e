use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use dockkit_core::dataset::{format_real, read_episode, read_index, read_trajectory};
use dockkit_core::Trajectory;

/// Segments used to approximate circular obstacles.
const CIRCLE_SEGMENTS: usize = 32;

#[derive(Debug, clap::Args)]
pub struct PlotArgs {
    /// Dataset directory (with an index file).
    #[arg(long)]
    pub dataset: PathBuf,
    /// Optional directory of `<episode_id>.csv` predicted trajectories.
    #[arg(long)]
    pub pred: Option<PathBuf>,
}

/// Writes `<id>_paths.csv` (series, index, x_m, y_m, cos_psi, sin_psi) and
/// `<id>_outlines.csv` (obstacle, index, x_m, y_m) per episode. Everything is
/// in the world frame of the archive's world description; trajectories are
/// mapped out of the start frame with the recorded start pose.
pub fn run(args: &PlotArgs, out: Option<&Path>) -> Result<()> {
    let out = out.map(Path::to_path_buf).unwrap_or_else(|| args.dataset.join("plot"));
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let index = read_index(&args.dataset)?;
    for entry in &index {
        let rec = read_episode(&args.dataset.join(&entry.path))?;
        let frame = rec.start_pose();
        let mut series = vec![("gt", rec.gt_trajectory.transformed(&frame))];
        if let Some(dir) = &args.pred {
            let file = dir.join(format!("{}.csv", entry.episode_id));
            if file.is_file() {
                series.push(("pred", read_trajectory(&file)?.transformed(&frame)));
            }
        }
        write_paths(&out.join(format!("{}_paths.csv", entry.episode_id)), &series)?;

        let path = out.join(format!("{}_outlines.csv", entry.episode_id));
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(["obstacle", "index", "x_m", "y_m"])?;
        for (k, obstacle) in rec.world.obstacles.iter().enumerate() {
            for (i, p) in obstacle.outline(CIRCLE_SEGMENTS).iter().enumerate() {
                w.write_record([k.to_string(), i.to_string(), format_real(p[0]), format_real(p[1])])?;
            }
        }
        w.flush()?;
    }
    println!("wrote plot data for {} episodes to {}", index.len(), out.display());
    Ok(())
}

fn write_paths(path: &Path, series: &[(&str, Trajectory)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(["series", "index", "x_m", "y_m", "cos_psi", "sin_psi"])?;
    for (name, traj) in series {
        for (i, (p, o)) in traj.positions().iter().zip(traj.orientations()).enumerate() {
            w.write_record([
                name.to_string(),
                i.to_string(),
                format_real(p[0]),
                format_real(p[1]),
                format_real(o.c),
                format_real(o.s),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
