//! Kinematic UAV, the per-episode closed loop and outcome evaluation.
//!
//! Each step renders the nadir view, segments it, runs the heatmap
//! pipeline, advances the controller and integrates the commanded velocity.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::controller::{
    compute_velocity, projected_safe_radius_px, step_state_machine, ControllerParams,
    LandingState, StateTag, VelocityCommand,
};
use crate::error::{Error, Result};
use crate::pipeline::{BestPixel, HeatmapPipeline, PipelineParams, PipelineTrace};
use crate::segmentation::{NoiseParams, SegmentationBackend};
use crate::world::{CameraModel, WorldModel};

/// Lowest altitude the kinematic model allows.
pub const MIN_ALTITUDE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UavState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub t: f64,
    pub dt: f64,
}

impl UavState {
    /// First-order step: `position += cmd * dt`, altitude kept within
    /// `[MIN_ALTITUDE, z_ceiling]`.
    #[must_use]
    pub fn integrate(&self, cmd: &VelocityCommand, z_ceiling: f64) -> UavState {
        UavState {
            x: self.x + cmd.vx * self.dt,
            y: self.y + cmd.vy * self.dt,
            z: (self.z + cmd.vz * self.dt).clamp(MIN_ALTITUDE, z_ceiling),
            t: self.t + self.dt,
            dt: self.dt,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    Success,
    Timeout,
    /// Reached the decision altitude over ground that is not safe.
    Unsafe,
    /// The segmentation backend failed; the episode was aborted.
    Error,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Success => "SUCCESS",
            Outcome::Timeout => "TIMEOUT",
            Outcome::Unsafe => "UNSAFE",
            Outcome::Error => "ERROR",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Outcome::Success, Outcome::Timeout, Outcome::Unsafe, Outcome::Error]
            .into_iter()
            .find(|o| o.as_str() == s)
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeConfig {
    pub seed: u64,
    pub start_x: f64,
    pub start_y: f64,
    pub start_z: f64,
    pub max_time: f64,
    pub dt: f64,
    pub focus_enabled: bool,
    pub noise: NoiseParams,
    pub controller: ControllerParams,
    pub camera: CameraModel,
    pub pipeline: PipelineParams,
}

impl EpisodeConfig {
    pub const DEFAULT_START_Z: f64 = 100.0;
    pub const DEFAULT_MAX_TIME: f64 = 1200.0;
    pub const DEFAULT_DT: f64 = 0.1;

    pub fn new(seed: u64, start_x: f64, start_y: f64, focus_enabled: bool) -> Self {
        Self {
            seed,
            start_x,
            start_y,
            start_z: Self::DEFAULT_START_Z,
            max_time: Self::DEFAULT_MAX_TIME,
            dt: Self::DEFAULT_DT,
            focus_enabled,
            noise: NoiseParams::none(),
            controller: ControllerParams::default(),
            camera: CameraModel::default(),
            pipeline: PipelineParams::default(),
        }
    }

    pub fn validate(&self, world: &WorldModel) -> Result<()> {
        if !world.contains(self.start_x, self.start_y) {
            return Err(Error::param(format!(
                "start ({}, {}) lies outside the {} x {} m world",
                self.start_x,
                self.start_y,
                world.width_m(),
                world.height_m()
            )));
        }
        if !(self.start_z > 0.0) || !(self.dt > 0.0) || !(self.max_time > 0.0) {
            return Err(Error::param("start_z, dt and max_time must be positive"));
        }
        self.noise.validate()?;
        self.controller.validate()?;
        self.camera.validate()?;
        self.pipeline.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub command: VelocityCommand,
    pub state: StateTag,
    pub r_focus: f64,
    pub best: Option<BestPixel>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub outcome: Outcome,
    pub time_s: f64,
    /// Length of the horizontal trajectory polyline.
    pub horiz_dist_m: f64,
    pub restarts: u32,
    pub final_uav: UavState,
    pub final_state: StateTag,
    pub trajectory: Vec<TrajectoryRow>,
    /// Backend failure message when `outcome` is `Error`.
    pub error: Option<String>,
}

pub const TRAJECTORY_HEADER: [&str; 12] = [
    "t", "x", "y", "z", "vx", "vy", "vz", "state", "r_focus", "best_u", "best_v", "score",
];

impl EpisodeRecord {
    /// Writes the trajectory as CSV; a missing best pixel leaves its fields empty.
    pub fn write_trajectory_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(TRAJECTORY_HEADER)?;
        for r in &self.trajectory {
            let (u, v, score) = match &r.best {
                Some(b) => (b.u.to_string(), b.v.to_string(), b.score.to_string()),
                None => Default::default(),
            };
            w.write_record([
                r.t.to_string(),
                r.x.to_string(),
                r.y.to_string(),
                r.z.to_string(),
                r.command.vx.to_string(),
                r.command.vy.to_string(),
                r.command.vz.to_string(),
                r.state.as_str().to_string(),
                r.r_focus.to_string(),
                u,
                v,
                score,
            ])?;
        }
        w.flush()
    }
}

/// Success iff at or below the decision altitude over a ground-truth safe
/// disc of radius `safe_radius_s`.
pub fn evaluate_outcome(world: &WorldModel, uav: &UavState, params: &ControllerParams) -> Outcome {
    if uav.z > params.success_altitude {
        Outcome::Timeout
    } else if world.ground_truth_safe_disc(uav.x, uav.y, params.safe_radius_s) {
        Outcome::Success
    } else {
        Outcome::Unsafe
    }
}

pub fn run_episode(
    world: &WorldModel,
    cfg: &EpisodeConfig,
    backend: &mut dyn SegmentationBackend,
) -> Result<EpisodeRecord> {
    run_episode_traced(world, cfg, backend, None, |_, _| Ok(()))
}

/// Like [`run_episode`], calling `on_trace` with the pipeline's intermediate
/// grids every `trace_every` frames.
pub fn run_episode_traced(
    world: &WorldModel,
    cfg: &EpisodeConfig,
    backend: &mut dyn SegmentationBackend,
    trace_every: Option<u64>,
    mut on_trace: impl FnMut(u64, &PipelineTrace) -> Result<()>,
) -> Result<EpisodeRecord> {
    cfg.validate(world)?;
    let cam = &cfg.camera;
    let params = &cfg.controller;
    let z_ceiling = 1.05 * params.safe_altitude;
    let max_steps = (cfg.max_time / cfg.dt).round() as u64;

    let mut pipeline = HeatmapPipeline::new(
        cam.image_width,
        cam.image_height,
        cfg.pipeline.clone(),
        cfg.focus_enabled,
    )?;
    let mut uav = UavState {
        x: cfg.start_x,
        y: cfg.start_y,
        z: cfg.start_z,
        t: 0.0,
        dt: cfg.dt,
    };
    let mut state = LandingState::new(cfg.seed, uav.t);
    let mut trajectory = Vec::new();
    let mut horiz = 0.0;
    let mut outcome = Outcome::Timeout;
    let mut error = None;

    for frame in 0..max_steps {
        let view = world.render_view(cam, uav.x, uav.y, uav.z)?;
        let raw = match backend.segment(&view, frame) {
            Ok(raw) => raw,
            Err(e) => {
                outcome = Outcome::Error;
                error = Some(e.to_string());
                break;
            }
        };
        if raw.mask.dims() != view.dims() {
            return Err(Error::DimensionMismatch {
                expected: view.dims(),
                actual: raw.mask.dims(),
            });
        }
        let s_px = projected_safe_radius_px(params.safe_radius_s, uav.z, cam)?;
        let keep_trace = trace_every.is_some_and(|n| n > 0 && frame % n == 0);
        let out = pipeline.process(&raw.mask, s_px, keep_trace)?;
        if let Some(trace) = &out.trace {
            on_trace(frame, trace)?;
        }

        let (next, target) = step_state_machine(
            state,
            out.best.as_ref(),
            out.safe_fraction_in_focus,
            uav.z,
            uav.t,
            cam,
            params,
        );
        state = next;
        pipeline.advance_focus(target);
        let cmd = compute_velocity(&state, out.best.as_ref(), uav.z, cam, params);

        trajectory.push(TrajectoryRow {
            t: uav.t,
            x: uav.x,
            y: uav.y,
            z: uav.z,
            command: cmd,
            state: state.tag,
            r_focus: out.r_focus,
            best: out.best,
        });

        let next_uav = uav.integrate(&cmd, z_ceiling);
        horiz += (next_uav.x - uav.x).hypot(next_uav.y - uav.y);
        uav = next_uav;

        if state.tag == StateTag::Landing && uav.z <= params.success_altitude {
            outcome = evaluate_outcome(world, &uav, params);
            break;
        }
    }

    Ok(EpisodeRecord {
        outcome,
        time_s: uav.t,
        horiz_dist_m: horiz,
        restarts: state.restarts,
        final_uav: uav,
        final_state: state.tag,
        trajectory,
        error,
    })
}
