use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use dockkit_core::config::GlobalConfig;
use dockkit_core::dataset::{format_real, read_episode, read_index, read_trajectory, INDEX_FILE, TRAJECTORY_FILE};
use dockkit_core::metrics::{evaluate, summarize, EvalReport, EvalSettings};
use dockkit_core::EpisodeStatus;
use rayon::prelude::*;

use crate::invalid;

pub const REPORTS_FILE: &str = "reports.csv";
pub const SUMMARY_FILE: &str = "summary.toml";

#[derive(Debug, clap::Args)]
pub struct EvalArgs {
    /// Predictions: a directory of `<episode_id>.csv` trajectory files, or a
    /// dataset directory whose ground truth is used as the prediction.
    #[arg(long)]
    pub pred: PathBuf,
    /// Ground-truth dataset directory (with an index file).
    #[arg(long)]
    pub gt: PathBuf,
    /// Also score episodes whose ground truth did not dock.
    #[arg(long)]
    pub include_failed: bool,
}

/// Prediction trajectory files keyed by episode id.
fn prediction_files(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    if dir.join(INDEX_FILE).is_file() {
        return Ok(read_index(dir)?
            .into_iter()
            .map(|e| (e.episode_id, dir.join(e.path).join(TRAJECTORY_FILE)))
            .collect());
    }
    let mut out = BTreeMap::new();
    let listing = fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))?;
    for entry in listing {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "csv") {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                out.insert(stem.to_string(), path);
            }
        }
    }
    Ok(out)
}

pub fn run(cfg: &GlobalConfig, args: &EvalArgs, out: Option<&Path>) -> Result<()> {
    let index = read_index(&args.gt)?;
    let preds = prediction_files(&args.pred)?;
    if preds.is_empty() {
        return Err(invalid(format!(
            "no predicted trajectories found in {}",
            args.pred.display()
        )));
    }
    let selected: Vec<_> = index
        .iter()
        .filter(|e| args.include_failed || e.status == EpisodeStatus::Docked)
        .collect();
    let missing: Vec<&str> = selected
        .iter()
        .filter(|e| !preds.contains_key(&e.episode_id))
        .map(|e| e.episode_id.as_str())
        .collect();
    let unknown: Vec<&str> = preds
        .keys()
        .filter(|id| !index.iter().any(|e| &e.episode_id == *id))
        .map(String::as_str)
        .collect();
    if !missing.is_empty() || !unknown.is_empty() {
        return Err(invalid(format!(
            "unmatched episodes; missing predictions: [{}]; predictions without ground truth: [{}]",
            missing.join(", "),
            unknown.join(", ")
        )));
    }
    if selected.is_empty() {
        return Err(invalid("no ground-truth episodes to evaluate"));
    }

    let reports = selected
        .par_iter()
        .map(|entry| {
            let id = &entry.episode_id;
            let rec = read_episode(&args.gt.join(&entry.path))?;
            let pred = read_trajectory(&preds[id])?;
            let settings = EvalSettings {
                robot_radius: rec.config.dwa.robot_radius,
                v_max: rec.config.dwa.v_max,
                w_max: rec.config.dwa.w_max,
                margin: cfg.eval.limit_margin,
                duration: rec.duration(),
                frame: rec.start_pose(),
            };
            let report = evaluate(&pred, &rec.gt_trajectory, &rec.world, &settings)?;
            Ok((id.clone(), report))
        })
        .collect::<Result<Vec<(String, EvalReport)>>>()
        .context("evaluating episodes")?;

    let out = out.map(Path::to_path_buf).unwrap_or_else(|| args.gt.join("eval"));
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    write_reports(&out.join(REPORTS_FILE), &reports)?;
    let all: Vec<EvalReport> = reports.into_iter().map(|(_, r)| r).collect();
    let summary = summarize(&all)?;
    let summary_path = out.join(SUMMARY_FILE);
    fs::write(&summary_path, toml::to_string(&summary)?)
        .with_context(|| format!("writing {}", summary_path.display()))?;

    println!(
        "{:>8} {:>11} {:>9} {:>9} {:>10} {:>6}",
        "episodes", "L2 Dis.(m)", "AER(deg)", "FDPE(m)", "FDOE(deg)", "SR"
    );
    println!(
        "{:>8} {:>11.4} {:>9.3} {:>9.4} {:>10.3} {:>6.3}",
        summary.episodes, summary.l2_dis, summary.aer, summary.fdpe, summary.fdoe, summary.sr
    );
    Ok(())
}

fn write_reports(path: &Path, reports: &[(String, EvalReport)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record([
        "episode_id",
        "l2_dis_m",
        "aer_deg",
        "fdpe_m",
        "fdoe_deg",
        "collision_free",
        "kinematically_feasible",
        "success",
    ])?;
    for (id, r) in reports {
        w.write_record([
            id.clone(),
            format_real(r.l2_dis),
            format_real(r.aer),
            format_real(r.fdpe),
            format_real(r.fdoe),
            r.collision_free.to_string(),
            r.kinematically_feasible.to_string(),
            r.success.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
