//! Command-line front end: simulation, estimation, and benchmarking over
//! one shared JSON configuration format.
//!
//! Every command reads a JSON config, writes its data files into the
//! output directory, and drops a `manifest.json` beside them recording the
//! command, tool version, resolved configuration, and output names. A
//! manifest is itself accepted wherever a config is: re-running a command
//! with `--config manifest.json` reproduces the original outputs byte for
//! byte within one build.
//!
//! Exit codes: 0 on success, 2 for configuration and input errors, 3 for
//! numerical failures discovered mid-run (explosions, non-convergence).

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::basis::CosineBasis;
use crate::bench::{self, ExperimentConfig};
use crate::error::{Error, Result};
use crate::estimator;
use crate::hawkes::{self, EventLog, HawkesParams};
use crate::sde::{self, SamplePath, SimConfig};

/// Top-level argument grammar.
#[derive(Debug, Parser)]
#[command(
    name = "hawkes-diffusion",
    version,
    about = "Simulate mutually exciting event processes and the jump diffusions \
             they drive, estimate the drift nonparametrically, and benchmark \
             the estimator"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate the event process and write its record (JSON + CSV).
    SimulateHawkes {
        /// JSON config: {"hawkes": {...}, "horizon": T, "seed": N}.
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (created if missing).
        #[arg(long, value_name = "DIR", default_value = ".")]
        out: PathBuf,
    },
    /// Simulate the jump diffusion together with its driving events.
    SimulatePath {
        /// JSON config: {"model": "...", "hawkes": {...}, "n": N,
        /// "delta": D, "substeps": S, "x0": X, "seed": N,
        /// "explosion_bound": B}.
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (created if missing).
        #[arg(long, value_name = "DIR", default_value = ".")]
        out: PathBuf,
    },
    /// Fit the drift on a recorded path and write the selected estimate.
    Estimate {
        /// JSON config: {"path": "path.csv", "events": "events.json",
        /// "model": "...", "lower": A, "upper": B, "rho": R,
        /// "m_max": M, "grid_points": G}.
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        /// Output directory (created if missing).
        #[arg(long, value_name = "DIR", default_value = ".")]
        out: PathBuf,
    },
    /// Run the Monte-Carlo risk study and write the result table.
    Bench {
        /// JSON config {"cells": [...]}; defaults to the standard
        /// 16-cell grid when omitted.
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
        /// Base seed for the default grid (default 1).
        #[arg(long)]
        seed: Option<u64>,
        /// Replicates per cell (default 200).
        #[arg(long)]
        replicates: Option<usize>,
        /// Full-scale study: the default grid at 1000 replicates.
        #[arg(long, conflicts_with_all = ["replicates", "config"])]
        paper: bool,
        /// Output directory (created if missing).
        #[arg(long, value_name = "DIR", default_value = ".")]
        out: PathBuf,
    },
}

/// Record written beside every command's outputs. Feeding a manifest back
/// as `--config` re-runs the command with the identical resolved
/// configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    pub outputs: Vec<String>,
}

/// Config for the event-process simulation command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HawkesRunConfig {
    pub hawkes: HawkesParams,
    pub horizon: f64,
    pub seed: u64,
}

/// Config for the path simulation command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathRunConfig {
    pub model: String,
    pub hawkes: HawkesParams,
    pub n: usize,
    pub delta: f64,
    #[serde(default = "default_substeps")]
    pub substeps: usize,
    #[serde(default)]
    pub x0: f64,
    pub seed: u64,
    #[serde(default = "default_explosion_bound")]
    pub explosion_bound: f64,
}

fn default_substeps() -> usize {
    5
}

fn default_explosion_bound() -> f64 {
    1e6
}

/// Config for the estimation command. The model name resolves the known
/// jump coefficient (needed to correct the increments) and the diffusion
/// bound (which calibrates the penalty), and supplies the reference drift
/// for the risk report and the truth column of the evaluation grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateRunConfig {
    /// Sample-path file: the CSV written by the path command, or its JSON.
    pub path: String,
    /// Event-record JSON. May be omitted only for jump-free models.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub events: Option<String>,
    pub model: String,
    pub lower: f64,
    pub upper: f64,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_m_max")]
    pub m_max: usize,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
}

fn default_rho() -> f64 {
    3.0
}

fn default_m_max() -> usize {
    20
}

fn default_grid_points() -> usize {
    201
}

/// Config for the benchmark command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchRunConfig {
    pub cells: Vec<ExperimentConfig>,
}

/// Parses arguments from the process environment, runs the command, and
/// returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::SimulateHawkes { config, seed, out } => {
            let mut cfg: HawkesRunConfig = load_config(&config, "simulate-hawkes")?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cmd_simulate_hawkes(&cfg, &out)
        }
        Command::SimulatePath { config, seed, out } => {
            let mut cfg: PathRunConfig = load_config(&config, "simulate-path")?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cmd_simulate_path(&cfg, &out)
        }
        Command::Estimate { config, out } => {
            let cfg: EstimateRunConfig = load_config(&config, "estimate")?;
            cmd_estimate(&cfg, &out)
        }
        Command::Bench {
            config,
            seed,
            replicates,
            paper,
            out,
        } => {
            let mut cells = match &config {
                Some(path) => load_config::<BenchRunConfig>(path, "bench")?.cells,
                None => {
                    let reps = replicates.unwrap_or(if paper { 1000 } else { 200 });
                    bench::default_grid(reps, seed.unwrap_or(1))
                }
            };
            if config.is_some() {
                if let Some(r) = replicates {
                    for c in &mut cells {
                        c.replicates = r;
                    }
                }
                if let Some(s) = seed {
                    for c in &mut cells {
                        c.base_seed = s;
                    }
                }
            }
            cmd_bench(&cells, &out)
        }
    }
}

/// Reads a JSON config, accepting either the bare config object or a
/// manifest produced by an earlier run of the same command.
fn load_config<T: serde::de::DeserializeOwned>(path: &Path, command: &str) -> Result<T> {
    let text = fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let config = match value.as_object() {
        Some(map) if map.contains_key("command") && map.contains_key("config") => {
            let recorded = map["command"].as_str().unwrap_or("");
            if recorded != command {
                return Err(Error::InvalidParameter {
                    name: "config",
                    reason: format!(
                        "manifest {} records command '{recorded}', not '{command}'",
                        path.display()
                    ),
                });
            }
            map["config"].clone()
        }
        _ => value,
    };
    Ok(serde_json::from_value(config)?)
}

fn write_output(dir: &Path, name: &str, text: &str, outputs: &mut Vec<String>) -> Result<()> {
    fs::write(dir.join(name), text)?;
    outputs.push(name.to_string());
    Ok(())
}

fn pretty_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn write_manifest<C: Serialize>(
    dir: &Path,
    command: &str,
    seed: Option<u64>,
    config: &C,
    outputs: Vec<String>,
) -> Result<()> {
    let manifest = RunManifest {
        command: command.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        config: serde_json::to_value(config)?,
        outputs,
    };
    fs::write(dir.join("manifest.json"), pretty_json(&manifest)?)?;
    Ok(())
}

fn cmd_simulate_hawkes(cfg: &HawkesRunConfig, out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    let log = hawkes::simulate(&cfg.hawkes, cfg.horizon, cfg.seed)?;
    let mut outputs = Vec::new();
    write_output(out, "events.json", &pretty_json(&log)?, &mut outputs)?;
    write_output(out, "events.csv", &log.to_csv(), &mut outputs)?;
    write_manifest(out, "simulate-hawkes", Some(cfg.seed), cfg, outputs)?;
    println!(
        "simulated {} events over [0, {}] across {} components -> {}",
        log.total_count(),
        log.horizon(),
        log.components(),
        out.display()
    );
    Ok(())
}

fn cmd_simulate_path(cfg: &PathRunConfig, out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    let model = sde::model_by_name(&cfg.model)?;
    let sim = SimConfig {
        n: cfg.n,
        delta: cfg.delta,
        substeps: cfg.substeps,
        x0: cfg.x0,
        seed: cfg.seed,
        explosion_bound: cfg.explosion_bound,
    };
    let (path, log) = sde::simulate_path(&model, &cfg.hawkes, &sim)?;
    let mut outputs = Vec::new();
    write_output(out, "path.csv", &path.to_csv(), &mut outputs)?;
    write_output(out, "path.json", &pretty_json(&path)?, &mut outputs)?;
    write_output(out, "events.json", &pretty_json(&log)?, &mut outputs)?;
    write_output(out, "events.csv", &log.to_csv(), &mut outputs)?;
    write_manifest(out, "simulate-path", Some(cfg.seed), cfg, outputs)?;
    println!(
        "simulated {} observations of model {} (step {}) with {} driving events -> {}",
        path.steps(),
        cfg.model,
        cfg.delta,
        log.total_count(),
        out.display()
    );
    Ok(())
}

fn cmd_estimate(cfg: &EstimateRunConfig, out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    if cfg.grid_points < 2 {
        return Err(Error::InvalidParameter {
            name: "grid_points",
            reason: format!("need at least 2 evaluation points, got {}", cfg.grid_points),
        });
    }
    let model = sde::model_by_name(&cfg.model)?;
    let path_text = fs::read_to_string(&cfg.path)?;
    let path: SamplePath = if cfg.path.ends_with(".json") {
        serde_json::from_str(&path_text)?
    } else {
        SamplePath::from_csv_str(&path_text, &cfg.path)?
    };
    let log: EventLog = match &cfg.events {
        Some(events_path) => serde_json::from_str(&fs::read_to_string(events_path)?)?,
        None if model.jump_bound() == 0.0 => EventLog::new(path.horizon(), vec![vec![]])?,
        None => {
            return Err(Error::InvalidParameter {
                name: "events",
                reason: format!(
                    "model {} has jumps; the corrected increments need the event \
                     record, so supply an events file",
                    cfg.model
                ),
            });
        }
    };
    let basis = CosineBasis::new(cfg.lower, cfg.upper)?;
    let samples = estimator::build_samples(&path, &log, &model, &basis)?;
    let estimate = estimator::select(
        &samples,
        &basis,
        cfg.m_max,
        cfg.rho,
        model.diffusion_bound(),
        path.steps(),
        path.delta(),
    )?;
    let truth = |x: f64| model.drift(x);
    let risk = estimator::empirical_risk(&estimate, truth, &samples)?;
    let risk_all = estimator::empirical_risk_per_observation(&estimate, truth, &samples)?;

    let mut grid = String::from("x,estimate,truth\n");
    let (lo, hi) = estimate.interval();
    let step = (hi - lo) / (cfg.grid_points - 1) as f64;
    for i in 0..cfg.grid_points {
        let x = lo + i as f64 * step;
        grid.push_str(&format!("{},{},{}\n", x, estimate.evaluate(x), truth(x)));
    }

    let mut outputs = Vec::new();
    write_output(out, "estimate.json", &pretty_json(&estimate)?, &mut outputs)?;
    write_output(out, "estimate_grid.csv", &grid, &mut outputs)?;
    write_manifest(out, "estimate", None, cfg, outputs)?;
    println!(
        "selected index {} (dimension {}) from {} in-interval samples",
        estimate.m_hat(),
        2 * estimate.m_hat() + 1,
        estimate.in_a_count()
    );
    println!("empirical risk (in-interval normalization): {risk}");
    println!("empirical risk (all-observation normalization): {risk_all}");
    Ok(())
}

fn cmd_bench(cells: &[ExperimentConfig], out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    let table = bench::run_table(cells)?;
    let mut outputs = Vec::new();
    write_output(out, "risk_table.csv", &table.to_csv(), &mut outputs)?;
    write_output(out, "risk_table.json", &pretty_json(&table)?, &mut outputs)?;
    let config = BenchRunConfig {
        cells: cells.to_vec(),
    };
    write_manifest(out, "bench", None, &config, outputs)?;
    for entry in &table.cells {
        let r = &entry.result;
        println!(
            "{} n={} delta={}: mean risk {:.4} (se {:.4}), median index {}",
            r.model, r.n, r.delta, r.mean_risk, r.stderr, r.median_mhat
        );
    }
    Ok(())
}
