//! Runs the paired focus/no-focus experiment and prints per-arm results.
//!
//! `cargo run --release -p slz-core --example ab_sweep -- [episodes] [base_seed]`

use slz_core::harness::{simulate, BatchConfig};
use slz_core::segmentation::NoiseParams;
use slz_core::sim::Outcome;

fn main() -> slz_core::Result<()> {
    let mut args = std::env::args().skip(1);
    let episodes = args.next().and_then(|s| s.parse().ok()).unwrap_or(20);
    let base_seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let mut cfg = BatchConfig {
        episodes,
        base_seed,
        jobs: 0,
        write_trajectories: false,
        ..BatchConfig::default()
    };
    cfg.defaults.noise = NoiseParams {
        component_flip_prob: 0.1,
        salt_pepper_prob: 0.02,
        boundary_jitter_px: 2,
        seed: 0,
    };
    let start = std::time::Instant::now();
    let eps = simulate(&cfg, None)?;
    for e in &eps {
        println!(
            "{:>9} seed={:<4} {:<8} t={:>7.1} d={:>7.1} restarts={}",
            e.row.arm, e.row.seed, e.row.outcome, e.row.time_s, e.row.horiz_dist_m, e.row.restarts
        );
    }
    for arm in &cfg.arms {
        let rows: Vec<_> = eps.iter().filter(|e| e.row.arm == arm.name).collect();
        let count = |o: Outcome| rows.iter().filter(|e| e.row.outcome == o).count();
        println!(
            "{}: success {} timeout {} unsafe {} error {}",
            arm.name,
            count(Outcome::Success),
            count(Outcome::Timeout),
            count(Outcome::Unsafe),
            count(Outcome::Error)
        );
    }
    eprintln!("elapsed {:.1?}", start.elapsed());
    Ok(())
}
