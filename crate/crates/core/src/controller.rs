//! Six-state landing state machine and visual-servoing velocity commands.
//!
//! The controller is a deterministic transducer: given the previous state
//! and this frame's pipeline output it yields the next state, the focus
//! radius target and a world-frame velocity command. It never looks at
//! images itself.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::image_center;
use crate::pipeline::BestPixel;
use crate::world::CameraModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StateTag {
    Searching,
    Aiming,
    Landing,
    Waiting,
    Climbing,
    Restarting,
}

impl StateTag {
    pub const ALL: [StateTag; 6] = [
        StateTag::Searching,
        StateTag::Aiming,
        StateTag::Landing,
        StateTag::Waiting,
        StateTag::Climbing,
        StateTag::Restarting,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StateTag::Searching => "SEARCHING",
            StateTag::Aiming => "AIMING",
            StateTag::Landing => "LANDING",
            StateTag::Waiting => "WAITING",
            StateTag::Climbing => "CLIMBING",
            StateTag::Restarting => "RESTARTING",
        }
    }

    /// The only transitions the machine may take (self-loops aside).
    pub const EDGES: [(StateTag, StateTag); 7] = [
        (StateTag::Searching, StateTag::Aiming),
        (StateTag::Aiming, StateTag::Landing),
        (StateTag::Landing, StateTag::Waiting),
        (StateTag::Waiting, StateTag::Landing),
        (StateTag::Waiting, StateTag::Climbing),
        (StateTag::Climbing, StateTag::Restarting),
        (StateTag::Restarting, StateTag::Searching),
    ];
}

impl std::fmt::Display for StateTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandingState {
    pub tag: StateTag,
    pub entered_at: f64,
    pub consecutive_aligned_frames: u32,
    pub restarts: u32,
    /// Seeds the search sweep and restart headings.
    pub seed: u64,
}

impl LandingState {
    pub fn new(seed: u64, t: f64) -> Self {
        Self {
            tag: StateTag::Searching,
            entered_at: t,
            consecutive_aligned_frames: 0,
            restarts: 0,
            seed,
        }
    }

    fn enter(self, tag: StateTag, t: f64) -> Self {
        Self {
            tag,
            entered_at: t,
            consecutive_aligned_frames: 0,
            ..self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ControllerParams {
    /// UAV safe radius in meters.
    pub safe_radius_s: f64,
    pub v_xy_max: f64,
    pub v_z_down: f64,
    pub v_z_up: f64,
    /// Proportional gain on the ground offset, 1/s.
    pub k_p: f64,
    /// Alignment tolerance for SEARCHING -> AIMING, fraction of image width.
    pub eps_search: f64,
    /// Alignment tolerance for AIMING -> LANDING, fraction of image width.
    pub eps_aim: f64,
    pub k_frames: u32,
    pub t_wait_max: f64,
    pub tau_safe: f64,
    pub safe_altitude: f64,
    pub success_altitude: f64,
    pub restart_distance: f64,
    pub focus_factor_aiming: f64,
    pub focus_factor_landing: f64,
}

impl Default for ControllerParams {
    fn default() -> Self {
        Self {
            safe_radius_s: 3.0,
            v_xy_max: 3.0,
            v_z_down: 2.0,
            v_z_up: 2.0,
            k_p: 0.5,
            eps_search: 0.05,
            eps_aim: 0.02,
            k_frames: 10,
            t_wait_max: 5.0,
            tau_safe: 0.6,
            safe_altitude: 100.0,
            success_altitude: 20.0,
            restart_distance: 40.0,
            focus_factor_aiming: 6.0,
            focus_factor_landing: 2.0,
        }
    }
}

impl ControllerParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("safe_radius_s", self.safe_radius_s),
            ("v_xy_max", self.v_xy_max),
            ("v_z_down", self.v_z_down),
            ("v_z_up", self.v_z_up),
            ("k_p", self.k_p),
            ("eps_search", self.eps_search),
            ("eps_aim", self.eps_aim),
            ("t_wait_max", self.t_wait_max),
            ("tau_safe", self.tau_safe),
            ("safe_altitude", self.safe_altitude),
            ("success_altitude", self.success_altitude),
            ("restart_distance", self.restart_distance),
            ("focus_factor_aiming", self.focus_factor_aiming),
            ("focus_factor_landing", self.focus_factor_landing),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(format!("{name} must be positive, got {v}")));
            }
        }
        if self.k_frames == 0 {
            return Err(Error::param("k_frames must be positive"));
        }
        if self.eps_aim > self.eps_search {
            return Err(Error::param("eps_aim must not exceed eps_search"));
        }
        if self.tau_safe > 1.0 {
            return Err(Error::param("tau_safe must lie in (0, 1]"));
        }
        if self.success_altitude >= self.safe_altitude {
            return Err(Error::param("success_altitude must be below safe_altitude"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VelocityCommand {
    pub vx: f64,
    pub vy: f64,
    pub vz: f64,
}

impl VelocityCommand {
    pub const ZERO: VelocityCommand = VelocityCommand {
        vx: 0.0,
        vy: 0.0,
        vz: 0.0,
    };

    pub fn horizontal_speed(&self) -> f64 {
        self.vx.hypot(self.vy)
    }
}

/// Safe radius projected into image pixels at altitude `z`.
pub fn projected_safe_radius_px(s_m: f64, z: f64, cam: &CameraModel) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::param(format!("altitude must be positive, got {z}")));
    }
    Ok(s_m / cam.meters_per_pixel(z))
}

fn focus_target(tag: StateTag, s_px: f64, cam: &CameraModel, params: &ControllerParams) -> f64 {
    match tag {
        StateTag::Searching | StateTag::Climbing | StateTag::Restarting => cam.half_diagonal_px(),
        StateTag::Aiming => params.focus_factor_aiming * s_px,
        StateTag::Landing | StateTag::Waiting => params.focus_factor_landing * s_px,
    }
}

/// Advances the state machine by one frame and returns the new state with
/// the focus radius target (pixels) for that state.
pub fn step_state_machine(
    state: LandingState,
    best: Option<&BestPixel>,
    safe_fraction_in_focus: f64,
    z: f64,
    t: f64,
    cam: &CameraModel,
    params: &ControllerParams,
) -> (LandingState, f64) {
    let width = cam.image_width as f64;
    let safe_now = best.is_some() && safe_fraction_in_focus >= params.tau_safe;
    let aligned_within = |eps: f64| best.is_some_and(|b| b.c_dist <= eps * width);

    let next = match state.tag {
        StateTag::Searching | StateTag::Aiming => {
            let (eps, to) = if state.tag == StateTag::Searching {
                (params.eps_search, StateTag::Aiming)
            } else {
                (params.eps_aim, StateTag::Landing)
            };
            let count = if aligned_within(eps) {
                state.consecutive_aligned_frames + 1
            } else {
                0
            };
            if count >= params.k_frames {
                state.enter(to, t)
            } else {
                LandingState {
                    consecutive_aligned_frames: count,
                    ..state
                }
            }
        }
        StateTag::Landing if !safe_now => state.enter(StateTag::Waiting, t),
        StateTag::Landing => state,
        StateTag::Waiting if safe_now => state.enter(StateTag::Landing, t),
        StateTag::Waiting if t - state.entered_at >= params.t_wait_max => {
            state.enter(StateTag::Climbing, t)
        }
        StateTag::Waiting => state,
        StateTag::Climbing if z >= params.safe_altitude => LandingState {
            restarts: state.restarts + 1,
            ..state.enter(StateTag::Restarting, t)
        },
        StateTag::Climbing => state,
        StateTag::Restarting if t - state.entered_at >= params.restart_distance / params.v_xy_max => {
            state.enter(StateTag::Searching, t)
        }
        StateTag::Restarting => state,
    };

    let s_px = projected_safe_radius_px(params.safe_radius_s, z, cam).unwrap_or(0.0);
    (next, focus_target(next.tag, s_px, cam, params))
}

/// Seeded heading in radians; `stream` separates sweep and restart draws.
fn heading(seed: u64, stream: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.random_range(0.0..TAU)
}

fn at_heading(theta: f64, speed: f64) -> VelocityCommand {
    VelocityCommand {
        vx: speed * theta.cos(),
        vy: speed * theta.sin(),
        vz: 0.0,
    }
}

/// Horizontal proportional command toward the ground projection of `best`,
/// with the planar speed capped at `v_xy_max`.
fn servo(best: &BestPixel, z: f64, cam: &CameraModel, params: &ControllerParams) -> VelocityCommand {
    let mpp = cam.meters_per_pixel(z);
    let (cu, cv) = image_center(cam.image_width, cam.image_height);
    let vx = params.k_p * (best.u as f64 - cu) * mpp;
    let vy = params.k_p * (best.v as f64 - cv) * mpp;
    let speed = vx.hypot(vy);
    let scale = if speed > params.v_xy_max {
        params.v_xy_max / speed
    } else {
        1.0
    };
    VelocityCommand {
        vx: vx * scale,
        vy: vy * scale,
        vz: 0.0,
    }
}

pub fn compute_velocity(
    state: &LandingState,
    best: Option<&BestPixel>,
    z: f64,
    cam: &CameraModel,
    params: &ControllerParams,
) -> VelocityCommand {
    let sweep_stream = 2 * state.restarts as u64;
    match (state.tag, best) {
        (StateTag::Searching | StateTag::Aiming, Some(b)) => servo(b, z, cam, params),
        // Nothing to aim at: fly a straight seeded sweep.
        (StateTag::Searching | StateTag::Aiming, None) => {
            at_heading(heading(state.seed, sweep_stream), params.v_xy_max)
        }
        (StateTag::Landing, Some(b)) => {
            if b.c_dist > params.eps_aim * cam.image_width as f64 {
                servo(b, z, cam, params)
            } else {
                VelocityCommand {
                    vz: -params.v_z_down,
                    ..VelocityCommand::ZERO
                }
            }
        }
        (StateTag::Landing | StateTag::Waiting, _) => VelocityCommand::ZERO,
        (StateTag::Climbing, _) => VelocityCommand {
            vz: params.v_z_up,
            ..VelocityCommand::ZERO
        },
        (StateTag::Restarting, _) => {
            at_heading(heading(state.seed, sweep_stream + 1), params.v_xy_max)
        }
    }
}
