//! Batch experiments: paired episodes across arms, metrics and summaries.
//!
//! Episode `i` of every arm uses seed `base_seed + i`, the same world, the
//! same start position and the same noise stream, so arms differ only in
//! whether dynamic focus is enabled.

mod config;
mod metrics;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::sim::{run_episode, EpisodeRecord, Outcome, UavState};
use crate::controller::StateTag;
use crate::world::WorldModel;

pub use config::{mix_seed, sample_start, Arm, BackendConfig, BatchConfig, EpisodeDefaults, WorldSource};
pub use metrics::{aggregate, read_metrics, write_metrics, ArmSummary, MetricsRow, SummaryStats, METRICS_HEADER};

pub const METRICS_FILE: &str = "metrics.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const TRAJECTORY_DIR: &str = "trajectories";

/// One finished episode of one arm.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub arm_index: usize,
    pub row: MetricsRow,
    pub final_uav: UavState,
    pub final_state: StateTag,
}

#[derive(Debug, Clone)]
pub struct BatchResult {
    pub summary: SummaryStats,
    pub episodes: Vec<EpisodeResult>,
}

pub fn trajectory_path(dir: &Path, arm: &str, seed: u64) -> PathBuf {
    dir.join(format!("{arm}_{seed}.csv"))
}

/// Runs every episode of every arm. Results are ordered by (arm, seed)
/// regardless of how many workers ran them.
pub fn simulate(cfg: &BatchConfig, trajectory_dir: Option<&Path>) -> Result<Vec<EpisodeResult>> {
    cfg.validate()?;
    let shared = if cfg.world.is_shared() {
        Some(cfg.world.build(cfg.base_seed)?)
    } else {
        None
    };
    let run_index = |i: u32| -> Result<Vec<EpisodeResult>> {
        let seed = cfg.episode_seed(i);
        let own;
        let world = match &shared {
            Some(w) => w,
            None => {
                own = cfg.world.build(seed)?;
                &own
            }
        };
        cfg.arms
            .iter()
            .enumerate()
            .map(|(arm_index, arm)| {
                let ep = cfg.episode_config(world, seed, arm);
                let mut backend = cfg.backend.build(&ep.noise);
                let rec = run_episode(world, &ep, &mut backend)?;
                if let Some(dir) = trajectory_dir {
                    write_trajectory(&rec, &trajectory_path(dir, &arm.name, seed))?;
                }
                Ok(EpisodeResult {
                    arm_index,
                    row: MetricsRow {
                        arm: arm.name.clone(),
                        seed,
                        start_x: ep.start_x,
                        start_y: ep.start_y,
                        outcome: rec.outcome,
                        time_s: rec.time_s,
                        horiz_dist_m: rec.horiz_dist_m,
                        restarts: rec.restarts,
                    },
                    final_uav: rec.final_uav,
                    final_state: rec.final_state,
                })
            })
            .collect()
    };

    let per_index = map_indices(cfg.jobs, cfg.episodes, run_index)?;
    let mut all = Vec::with_capacity(cfg.episodes as usize * cfg.arms.len());
    for r in per_index {
        all.extend(r?);
    }
    all.sort_by_key(|e| (e.arm_index, e.row.seed));
    Ok(all)
}

fn write_trajectory(rec: &EpisodeRecord, path: &Path) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    rec.write_trajectory_csv(BufWriter::new(f))
        .map_err(|e| Error::io(path, e))
}

/// Runs the batch and writes `metrics.csv`, `summary.json` and (optionally)
/// per-episode trajectories under `cfg.output_dir`.
pub fn run_batch(cfg: &BatchConfig) -> Result<BatchResult> {
    cfg.validate()?;
    let out = &cfg.output_dir;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    // Open the metrics file up front so an unwritable directory fails before any episode runs.
    let metrics_path = out.join(METRICS_FILE);
    let metrics_file = File::create(&metrics_path).map_err(|e| Error::io(&metrics_path, e))?;
    let traj_dir = out.join(TRAJECTORY_DIR);
    if cfg.write_trajectories {
        std::fs::create_dir_all(&traj_dir).map_err(|e| Error::io(&traj_dir, e))?;
    }

    let episodes = simulate(cfg, cfg.write_trajectories.then_some(traj_dir.as_path()))?;
    let rows: Vec<MetricsRow> = episodes.iter().map(|e| e.row.clone()).collect();
    write_metrics(BufWriter::new(metrics_file), &rows).map_err(|e| Error::io(&metrics_path, e))?;
    let summary = aggregate(&rows);
    summary.write(&out.join(SUMMARY_FILE))?;
    Ok(BatchResult { summary, episodes })
}

/// Recomputes the summary from an existing metrics file.
pub fn report(metrics_path: &Path) -> Result<SummaryStats> {
    Ok(aggregate(&read_metrics(metrics_path)?))
}

/// Re-checks a success against the world raster.
pub fn verify_success(world: &WorldModel, result: &EpisodeResult, cfg: &BatchConfig) -> bool {
    let p = &cfg.defaults.controller;
    result.row.outcome == Outcome::Success
        && result.final_state == StateTag::Landing
        && result.final_uav.z <= p.success_altitude
        && world.ground_truth_safe_disc(result.final_uav.x, result.final_uav.y, p.safe_radius_s)
}

#[cfg(feature = "parallel")]
fn map_indices<T: Send>(jobs: usize, n: u32, f: impl Fn(u32) -> T + Sync + Send) -> Result<Vec<T>> {
    use rayon::prelude::*;
    if jobs == 1 {
        return Ok((0..n).map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::param(format!("cannot start {jobs} workers: {e}")))?;
    Ok(pool.install(|| (0..n).into_par_iter().map(f).collect()))
}

#[cfg(not(feature = "parallel"))]
fn map_indices<T>(_jobs: usize, n: u32, f: impl Fn(u32) -> T) -> Result<Vec<T>> {
    Ok((0..n).map(f).collect())
}
