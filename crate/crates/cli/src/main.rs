//! `dockkit` command-line front end.
//!
//! Exit codes: 0 success, 2 validation error (bad flags, config, or input
//! files), 3 runtime error.

mod eval;
mod gen;
mod plot;
mod tools;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use dockkit_core::config::{GlobalConfig, CONFIG_ENV};

#[derive(Debug, Parser)]
#[command(
    name = "dockkit",
    version,
    about = "Docking simulation, dataset and evaluation toolkit"
)]
struct Cli {
    /// TOML config file; flags below override its values.
    #[arg(long, env = CONFIG_ENV, global = true)]
    config: Option<PathBuf>,
    /// Print the fully resolved config and exit.
    #[arg(long, global = true)]
    print_config: bool,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, clap::Args)]
struct Overrides {
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    episodes: Option<usize>,
    /// Output location: dataset root for `gen`, report/plot directory for
    /// `eval`/`plot`, point file for `backproject`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Virtual-to-real docking point distance (m).
    #[arg(long, global = true)]
    standoff: Option<f64>,
    #[arg(long, global = true)]
    q_points: Option<usize>,
    #[arg(long, global = true)]
    v_max: Option<f64>,
    #[arg(long, global = true)]
    w_max: Option<f64>,
    #[arg(long, global = true)]
    robot_radius: Option<f64>,
    #[arg(long, global = true)]
    safety_margin: Option<f64>,
    #[arg(long, global = true)]
    horizon: Option<f64>,
    #[arg(long, global = true)]
    samples_v: Option<usize>,
    #[arg(long, global = true)]
    samples_w: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate randomized worlds, run docking episodes, write a dataset.
    Gen,
    /// Score predicted trajectories against a dataset.
    Eval(eval::EvalArgs),
    /// Emit path and obstacle-outline CSVs for external plotting.
    Plot(plot::PlotArgs),
    /// Back-project a 16-bit PGM depth image into a point cloud.
    Backproject(tools::BackprojectArgs),
    /// Print the four-phase docking plan for a robot and station pose.
    Plan(tools::PlanArgs),
}

/// Bad user input; maps to exit code 2.
#[derive(Debug)]
pub struct Invalid(pub String);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

pub fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Invalid(msg.into()).into()
}

fn resolve_config(cli: &Cli) -> Result<GlobalConfig> {
    let mut cfg = match &cli.config {
        // An unreadable config is a usage problem, not a runtime failure.
        Some(path) => GlobalConfig::load(path)
            .map_err(|e| invalid(format!("config {}: {:#}", path.display(), anyhow::Error::from(e))))?,
        None => GlobalConfig::default(),
    };
    let o = &cli.overrides;
    if let Some(v) = o.seed {
        cfg.seed = v;
    }
    if let Some(v) = o.episodes {
        cfg.episodes = v;
    }
    if let Some(v) = &o.out {
        cfg.out = v.clone();
    }
    if let Some(v) = o.standoff {
        cfg.sim.standoff = v;
    }
    if let Some(v) = o.q_points {
        cfg.sim.q_points = v;
    }
    let d = &mut cfg.dwa;
    for (slot, value) in [
        (&mut d.v_max, o.v_max),
        (&mut d.w_max, o.w_max),
        (&mut d.robot_radius, o.robot_radius),
        (&mut d.safety_margin, o.safety_margin),
        (&mut d.horizon, o.horizon),
    ] {
        if let Some(v) = value {
            *slot = v;
        }
    }
    if let Some(v) = o.samples_v {
        d.samples_v = v;
    }
    if let Some(v) = o.samples_w {
        d.samples_w = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    let cfg = resolve_config(&cli)?;
    if cli.print_config {
        print!("{}", cfg.to_toml());
        return Ok(());
    }
    let out = cli.overrides.out.as_deref();
    match cli.command {
        None => Err(invalid("no subcommand given (try --help)")),
        Some(Command::Gen) => gen::run(&cfg),
        Some(Command::Eval(args)) => eval::run(&cfg, &args, out),
        Some(Command::Plot(args)) => plot::run(&args, out),
        Some(Command::Backproject(args)) => tools::backproject(&cfg, &args, out),
        Some(Command::Plan(args)) => tools::plan(&cfg, &args),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let validation = err.chain().any(|cause| {
        cause.downcast_ref::<Invalid>().is_some()
            || cause
                .downcast_ref::<dockkit_core::Error>()
                .is_some_and(|e| e.is_validation())
    });
    if validation {
        2
    } else {
        3
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
