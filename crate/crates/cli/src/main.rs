//! `slz`: generate worlds, fly single episodes, run paired batches and
//! re-aggregate metrics.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use slz_core::harness::{
    report, run_batch, trajectory_path, Arm, BackendConfig, BatchConfig, WorldSource, SUMMARY_FILE,
};
use slz_core::sim::{run_episode_traced, Outcome};
use slz_core::world::GeneratorParams;
use slz_core::Error;

/// Seed of the bundled demo world used by `run` without `--world`.
const DEMO_WORLD_SEED: u64 = 7;

#[derive(Parser, Debug)]
#[command(name = "slz", version, about = "Reactive UAV safe-landing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic world and save it as <out>.png + <out>.json.
    GenWorld(GenWorldArgs),
    /// Fly one episode and write its trajectory.
    Run(RunArgs),
    /// Run paired episodes for every arm and write metrics and a summary.
    Batch(BatchArgs),
    /// Recompute summary.json from an existing metrics.csv.
    Report(ReportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BackendKind {
    Oracle,
    Remote,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON file mirroring the batch configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    backend: Option<BackendKind>,
    /// Service root for the remote backend, e.g. http://127.0.0.1:8080.
    #[arg(long)]
    backend_url: Option<String>,
    /// World file base path (without .png/.json).
    #[arg(long)]
    world: Option<PathBuf>,
    /// Worker threads for batches; 0 uses every core.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args, Debug)]
struct GenWorldArgs {
    #[arg(long, default_value_t = DEMO_WORLD_SEED)]
    seed: u64,
    /// Output base path; writes <out>.png and <out>.json.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 512.0)]
    width_m: f64,
    #[arg(long, default_value_t = 512.0)]
    height_m: f64,
    #[arg(long, default_value_t = 0.25)]
    meters_per_cell: f64,
    /// Clutter densities are taken from this config's world section.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Toggle::On)]
    focus: Toggle,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Dump pipeline images every N frames (default 10) under <out>/debug.
    #[arg(long, num_args = 0..=1, default_missing_value = "10", value_name = "EVERY")]
    dump_debug_frames: Option<u64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct BatchArgs {
    /// Base seed; episode i uses seed + i.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    episodes: Option<u32>,
    /// Restrict the batch to a single arm.
    #[arg(long, value_enum)]
    focus: Option<Toggle>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// metrics.csv of a finished batch.
    metrics: PathBuf,
    /// Defaults to summary.json next to the metrics file.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::Format { .. } => Failure::Config(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn base_config(common: &Common) -> Result<BatchConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => BatchConfig::load(path)?,
        None => BatchConfig::default(),
    };
    if let Some(world) = &common.world {
        cfg.world = WorldSource::File { path: world.clone() };
    }
    if let Some(jobs) = common.jobs {
        cfg.jobs = jobs;
    }
    match (common.backend, &common.backend_url) {
        (Some(BackendKind::Oracle), _) => cfg.backend = BackendConfig::Oracle,
        (Some(BackendKind::Remote), Some(url)) => set_remote_url(&mut cfg, url),
        (Some(BackendKind::Remote), None) => match &cfg.backend {
            BackendConfig::Remote { .. } => {}
            BackendConfig::Oracle => {
                return Err(Failure::Config("--backend remote needs --backend-url".into()));
            }
        },
        (None, Some(url)) => set_remote_url(&mut cfg, url),
        (None, None) => {}
    }
    Ok(cfg)
}

fn set_remote_url(cfg: &mut BatchConfig, new_url: &str) {
    match &mut cfg.backend {
        BackendConfig::Remote { url, .. } => *url = new_url.to_string(),
        BackendConfig::Oracle => {
            cfg.backend = BackendConfig::Remote {
                url: new_url.to_string(),
                timeout_ms: 5_000,
                prompts: None,
                threshold: 0.5,
            }
        }
    }
}

fn gen_world(args: &GenWorldArgs) -> Result<(), Failure> {
    let clutter = match &args.config {
        Some(path) => match BatchConfig::load(path)?.world {
            WorldSource::Generate { clutter, .. } => clutter,
            WorldSource::File { .. } => GeneratorParams::default(),
        },
        None => GeneratorParams::default(),
    };
    let world = slz_core::world::generate_world(args.seed, args.width_m, args.height_m, args.meters_per_cell, &clutter)?;
    world.save(&args.out)?;
    println!(
        "wrote {}.png ({} x {} cells, safe fraction {:.3})",
        args.out.display(),
        world.labels().width(),
        world.labels().height(),
        world.safe_fraction()
    );
    Ok(())
}

fn run(args: &RunArgs) -> Result<(), Failure> {
    let mut cfg = base_config(&args.common)?;
    if args.common.world.is_none() && args.common.config.is_none() {
        cfg.world = WorldSource::Generate {
            seed: Some(DEMO_WORLD_SEED),
            width_m: 512.0,
            height_m: 512.0,
            meters_per_cell: 0.25,
            clutter: GeneratorParams::default(),
        };
    }
    cfg.validate()?;
    let arm = match args.focus {
        Toggle::On => Arm::focus(),
        Toggle::Off => Arm::no_focus(),
    };
    let world = cfg.world.build(args.seed)?;
    let ep = cfg.episode_config(&world, args.seed, &arm);
    let mut backend = cfg.backend.build(&ep.noise);

    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let debug_dir = args.out.join("debug");
    if args.dump_debug_frames.is_some() {
        std::fs::create_dir_all(&debug_dir).map_err(|e| Error::io(&debug_dir, e))?;
    }
    let rec = run_episode_traced(&world, &ep, &mut backend, args.dump_debug_frames, |frame, trace| {
        trace.dump(&debug_dir, &format!("frame_{frame:05}"))
    })?;

    let path = trajectory_path(&args.out, &arm.name, args.seed);
    let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    rec.write_trajectory_csv(std::io::BufWriter::new(file))
        .map_err(|e| Error::io(&path, e))?;
    println!(
        "{} after {} s, {} m travelled, {} restarts; trajectory in {}",
        rec.outcome,
        rec.time_s,
        rec.horiz_dist_m,
        rec.restarts,
        path.display()
    );
    match (rec.outcome, rec.error) {
        (Outcome::Error, Some(msg)) => Err(Failure::Runtime(format!("segmentation backend failed: {msg}"))),
        _ => Ok(()),
    }
}

fn batch(args: &BatchArgs) -> Result<(), Failure> {
    let mut cfg = base_config(&args.common)?;
    if let Some(seed) = args.seed {
        cfg.base_seed = seed;
    }
    if let Some(n) = args.episodes {
        cfg.episodes = n;
    }
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    if let Some(focus) = args.focus {
        cfg.arms = vec![match focus {
            Toggle::On => Arm::focus(),
            Toggle::Off => Arm::no_focus(),
        }];
    }
    let res = run_batch(&cfg)?;
    for arm in &res.summary.arms {
        println!(
            "{}: {}/{} successes ({:.0}%)",
            arm.name,
            arm.successes,
            arm.episodes,
            100.0 * arm.success_rate
        );
    }
    println!("results in {}", cfg.output_dir.display());
    Ok(())
}

fn report_cmd(args: &ReportArgs) -> Result<(), Failure> {
    let summary = report(&args.metrics)?;
    let out = args.out.clone().unwrap_or_else(|| {
        args.metrics
            .parent()
            .unwrap_or(Path::new("."))
            .join(SUMMARY_FILE)
    });
    summary.write(&out)?;
    print!("{}", summary.to_json());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::GenWorld(a) => gen_world(a),
        Command::Run(a) => run(a),
        Command::Batch(a) => batch(a),
        Command::Report(a) => report_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
