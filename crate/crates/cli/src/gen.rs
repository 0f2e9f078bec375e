use std::fs;

use anyhow::{Context, Result};
use dockkit_core::config::GlobalConfig;
use dockkit_core::dataset::{episode_id, write_episode, write_index, IndexEntry};
use dockkit_core::EpisodeStatus;
use rayon::prelude::*;

/// Resolved config written next to the index so a dataset can be regenerated.
/// Its `out` is `.` so the copy does not depend on where the dataset lives.
pub const CONFIG_COPY: &str = "config.toml";

pub fn run(cfg: &GlobalConfig) -> Result<()> {
    let root = &cfg.out;
    fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
    let entries = (0..cfg.episodes)
        .into_par_iter()
        .map(|i| {
            let rec = cfg.run_indexed_episode(i).with_context(|| format!("episode {i}"))?;
            let id = episode_id(i);
            write_episode(&rec, &root.join(&id)).with_context(|| format!("writing episode {i}"))?;
            Ok(IndexEntry {
                path: id.clone().into(),
                episode_id: id,
                status: rec.status,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    write_index(root, &entries)?;
    let copy = root.join(CONFIG_COPY);
    let relocatable = GlobalConfig {
        out: ".".into(),
        ..cfg.clone()
    };
    fs::write(&copy, relocatable.to_toml()).with_context(|| format!("writing {}", copy.display()))?;

    println!("wrote {} episodes to {}", entries.len(), root.display());
    for status in EpisodeStatus::ALL {
        let n = entries.iter().filter(|e| e.status == status).count();
        println!("{status:<10} {n}");
    }
    Ok(())
}
